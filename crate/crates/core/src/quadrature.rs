//! Symmetric quadrature rules on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Rules are stored as barycentric orbits and expanded on construction.
//! Weights of each table sum to one; the expanded rule is scaled to the
//! reference area 1/2. All weights are positive.

#![allow(clippy::excessive_precision)]

use crate::{Error, Result};

/// Highest polynomial degree covered by the tables.
pub const MAX_DEGREE: usize = 10;

struct Table {
    degree: usize,
    centroid: Option<f64>,
    /// `(a, w)`: points `(a, a, 1 - 2a)` and permutations.
    s21: &'static [(f64, f64)],
    /// `(a, b, w)`: all six permutations of `(a, b, 1 - a - b)`.
    s111: &'static [(f64, f64, f64)],
}

#[rustfmt::skip]
const TABLES: &[Table] = &[
    Table { degree: 1, centroid: Some(1.0), s21: &[], s111: &[] },
    Table { degree: 2, centroid: None, s21: &[(0.166_666_666_666_666_67, 0.333_333_333_333_333_33)], s111: &[] },
    // Strang-Fix six point rule
    Table { degree: 3, centroid: None, s21: &[],
        s111: &[(0.659_027_622_374_092_215_18, 0.231_933_368_553_030_572_5, 0.166_666_666_666_666_666_67)] },
    Table { degree: 4, centroid: None,
        s21: &[(0.445_948_490_915_964_886_32, 0.223_381_589_678_011_465_7),
               (0.091_576_213_509_770_743_46, 0.109_951_743_655_321_867_64)],
        s111: &[] },
    Table { degree: 5, centroid: Some(0.225),
        s21: &[(0.470_142_064_105_115_089_77, 0.132_394_152_788_506_180_74),
               (0.101_286_507_323_456_338_8, 0.125_939_180_544_827_152_6)],
        s111: &[] },
    Table { degree: 6, centroid: None,
        s21: &[(0.249_286_745_170_910_421_29, 0.116_786_275_726_379_366_03),
               (0.063_089_014_491_502_228_34, 0.050_844_906_370_206_816_921)],
        s111: &[(0.053_145_049_844_816_947_353, 0.310_352_451_033_784_405_42, 0.082_851_075_618_373_575_194)] },
    Table { degree: 8, centroid: Some(0.144_315_607_677_787_168_25),
        s21: &[(0.459_292_588_292_723_156_03, 0.095_091_634_267_284_624_794),
               (0.170_569_307_751_760_206_62, 0.103_217_370_534_718_250_28),
               (0.050_547_228_317_030_975_458, 0.032_458_497_623_198_080_311)],
        s111: &[(0.008_394_777_409_957_605_337_2, 0.263_112_829_634_638_113_42, 0.027_230_314_174_434_994_265)] },
    Table { degree: 9, centroid: Some(0.097_135_796_282_798_833_819),
        s21: &[(0.489_682_519_198_737_627_78, 0.031_334_700_227_139_070_537),
               (0.437_089_591_492_936_637_27, 0.077_827_541_004_774_279_317),
               (0.188_203_535_619_032_730_24, 0.079_647_738_927_210_253_033),
               (0.044_729_513_394_452_709_865, 0.025_577_675_658_698_031_262)],
        s111: &[(0.036_838_412_054_736_283_635, 0.221_962_989_160_765_695_68, 0.043_283_539_377_289_377_289)] },
    Table { degree: 10, centroid: Some(0.090_817_990_382_753_580_095),
        s21: &[(0.485_577_633_383_657_377_37, 0.036_725_957_756_466_704_717),
               (0.109_481_575_485_037_054_8, 0.045_321_059_435_527_934_783)],
        s111: &[(0.141_707_219_414_879_954_76, 0.307_939_838_764_120_950_17, 0.072_757_916_845_420_108_604),
                (0.025_003_534_762_686_386_074, 0.246_672_560_639_902_693_92, 0.028_327_242_531_057_484_837),
                (0.009_540_815_400_299_457_580_2, 0.066_803_251_012_200_265_774, 0.009_421_666_963_732_823_459_9)] },
];

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    degree: usize,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Smallest tabulated rule exact for polynomials of degree `min_degree`.
    pub fn gauss(min_degree: usize) -> Result<Self> {
        if min_degree == 0 || min_degree > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "no quadrature rule of degree {min_degree} (supported: 1..={MAX_DEGREE})"
            )));
        }
        let table = TABLES.iter().find(|t| t.degree >= min_degree).expect("table covers MAX_DEGREE");
        Ok(Self::expand(table))
    }

    fn expand(table: &Table) -> Self {
        let mut bary: Vec<([f64; 3], f64)> = Vec::new();
        if let Some(w) = table.centroid {
            let c = 1.0 / 3.0;
            bary.push(([c, c, c], w));
        }
        for &(a, w) in table.s21 {
            let b = 1.0 - 2.0 * a;
            bary.extend([([a, a, b], w), ([a, b, a], w), ([b, a, a], w)]);
        }
        for &(a, b, w) in table.s111 {
            let c = 1.0 - a - b;
            for l in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                bary.push((l, w));
            }
        }
        // reference coordinates (xi, eta) = (lambda_1, lambda_2)
        let points = bary.iter().map(|(l, _)| [l[1], l[2]]).collect();
        let weights = bary.iter().map(|(_, w)| 0.5 * w).collect();
        Self { degree: table.degree, points, weights }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}
