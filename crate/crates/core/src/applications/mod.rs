//! The two canned pipelines: the trivariate `(1+z, 1+2z)` family and the
//! planar-map core family `(1+z, 1-z)`, plus the Airy functions behind the
//! map-Airy density.

pub mod airy;
pub mod planar;
pub mod sequences;
pub mod trivariate;

use crate::exact_series::RationalPoly;
use crate::function_system::{FunctionSystem, NormSpec};

/// `(1+z, 1+2z)`.
pub fn trivariate_system() -> FunctionSystem {
    FunctionSystem::from_polys(
        vec![RationalPoly::from_integers(&[1, 1]), RationalPoly::from_integers(&[1, 2])],
        None,
    )
    .expect("valid system")
}

/// `|d_0| + |d_1| + 2|d_2|`.
pub fn trivariate_norm() -> NormSpec {
    NormSpec::WeightedL1 { weights: vec![1.0, 1.0, 2.0] }
}

/// `(1+z, 1-z)`.
pub fn planar_system() -> FunctionSystem {
    FunctionSystem::from_polys(
        vec![RationalPoly::from_integers(&[1, 1]), RationalPoly::from_integers(&[1, -1])],
        None,
    )
    .expect("valid system")
}

pub fn planar_norm() -> NormSpec {
    NormSpec::LInf
}
