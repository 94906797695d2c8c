//! Small numerical toolbox: quadrature, root finding, cubic splines,
//! 2x2 linear algebra, counter-based jitter.

pub mod quad;
pub mod roots;
pub mod spline;
pub mod linalg;
pub mod rng;
pub mod fd;
