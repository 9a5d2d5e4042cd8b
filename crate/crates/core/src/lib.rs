//! Spinor coherent wave packets in a 3D isotropic harmonic oscillator with
//! `κ l·s` coupling: the spin-orbit pendulum.
//!
//! The packet starts as a Poisson superposition of stretched states
//! `|l, m_l = l⟩` times a spinor. Evolution is exact: the Hamiltonian is
//! diagonal in `|l, j = l ± 1/2, m_j⟩`, so [`propagator`] changes basis,
//! multiplies phases and changes back. [`observables`] and [`density`] read
//! out angular momenta and real-space densities; [`oracle`] re-derives the
//! dynamics from a dense Hamiltonian for verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod basis;
pub mod cli;
pub mod density;
pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod packet;
pub mod propagator;
pub mod quadrature;

pub use angular::{cg, ladder_coeff, CgPair, HalfInt};
pub use basis::{eval_basis, radial, sph_harm, BasisState, SpacePoint, Spin};
pub use density::{
    classical_orbit_radius, density_snapshots, eval_spinor, maxima_track, plane_density,
    subpacket_maximum, DensityField, DensityGrid, SphereGrid, SphereMax, SphereTrack,
};
pub use error::{Error, Result};
pub use model::{energy, kappa_for_ratio, ls_eigenvalue, JBranch, ModelParams};
pub use observables::{orbital_expectation, series, spin_expectation, ObservableSeries, Vec3};
pub use packet::{build_packet, choose_l_max, poisson_amplitudes, SpinDirection, SpinorPacket};
pub use propagator::{from_coupled, propagate, to_coupled, CoupledPacket, Propagator};

/// Runs `f` on a dedicated rayon pool with `workers` threads (0 = rayon
/// default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}
