//! Numerical kernels: hypergeometric function, oscillatory outage integral,
//! by-parts Stieltjes integrals and the shared adaptive quadrature.

pub mod hyp2f1;
pub mod oscillatory;
pub mod quad;
pub mod stieltjes;
pub mod sum;

pub use hyp2f1::{gauss_2f1_neg, interference_2f1};
pub use oscillatory::{
    differentiate_under_integral, oscillatory_integral_mc_outage, outage_load, outage_of_load, LoadDerivatives,
};
pub use quad::QuadratureSpec;
pub use stieltjes::weighted_stieltjes_integral;
