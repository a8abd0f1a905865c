use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SiteId;

pub const MIN_CLASSES: usize = 2;
pub const MAX_CLASSES: usize = 9;
pub const DEFAULT_CLASSES: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Quantile,
    EqualInterval,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantile" | "quantiles" => Ok(Scheme::Quantile),
            "equal_interval" | "equal-interval" => Ok(Scheme::EqualInterval),
            _ => Err(Error::InvalidArgument(format!("unknown classification scheme `{s}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Quantile => "quantile",
            Scheme::EqualInterval => "equal_interval",
        })
    }
}

/// Class assignment for a set of sites. A value `v` falls into class
/// `#{breaks b : b < v}`, so a value equal to a break joins the lower class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassBreaks {
    pub scheme: Scheme,
    pub k: usize,
    /// `k - 1` non-decreasing breaks; empty when no site has a value.
    pub breaks: Vec<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Site and class index in input order; `-1` means no data.
    pub classes: Vec<(SiteId, i32)>,
}

impl ClassBreaks {
    pub fn class_of(&self, value: f64) -> i32 {
        self.breaks.iter().filter(|b| **b < value).count() as i32
    }

    pub fn class_indices(&self) -> Vec<i32> {
        self.classes.iter().map(|(_, c)| *c).collect()
    }

    /// `(low, high)` value range covered by `class`.
    pub fn class_range(&self, class: usize) -> Option<(f64, f64)> {
        let (min, max) = (self.min?, self.max?);
        let low = if class == 0 { min } else { self.breaks[class - 1] };
        let high = if class + 1 == self.k { max } else { self.breaks[class] };
        Some((low, high))
    }
}

pub fn check_class_count(k: usize) -> Result<()> {
    if (MIN_CLASSES..=MAX_CLASSES).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("class count must be between {MIN_CLASSES} and {MAX_CLASSES}, got {k}")))
    }
}

/// Classifies site values into `k` classes. Quantile breaks sit at the
/// `ceil(i·n/k)`-th smallest value for `i = 1..k-1`; equal-interval breaks
/// split `[min, max]` into `k` equal spans.
pub fn classify(values: &[(SiteId, Option<f64>)], scheme: Scheme, k: usize) -> Result<ClassBreaks> {
    check_class_count(k)?;
    let mut present: Vec<f64> = values.iter().filter_map(|(_, v)| *v).filter(|v| v.is_finite()).collect();
    present.sort_by(f64::total_cmp);
    let n = present.len();

    let breaks: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        let (min, max) = (present[0], present[n - 1]);
        (1..k)
            .map(|i| match scheme {
                Scheme::Quantile => present[(i * n).div_ceil(k) - 1],
                Scheme::EqualInterval => min + (max - min) * i as f64 / k as f64,
            })
            .collect()
    };

    let mut out = ClassBreaks {
        scheme,
        k,
        breaks,
        min: present.first().copied(),
        max: present.last().copied(),
        classes: Vec::with_capacity(values.len()),
    };
    out.classes = values
        .iter()
        .map(|(id, v)| (id.clone(), v.filter(|v| v.is_finite()).map_or(-1, |v| out.class_of(v))))
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(values: &[f64]) -> Vec<(SiteId, Option<f64>)> {
        values.iter().enumerate().map(|(i, v)| (SiteId::new(format!("s{i}")), Some(*v))).collect()
    }

    #[test]
    fn median_split() {
        let c = classify(&input(&[10.0, 20.0, 30.0, 40.0]), Scheme::Quantile, 2).unwrap();
        assert_eq!(c.class_indices(), [0, 0, 1, 1]);
        assert_eq!(c.breaks, [20.0]);
    }

    #[test]
    fn equal_interval_split() {
        let c = classify(&input(&[0.0, 35.0, 70.0, 100.0]), Scheme::EqualInterval, 2).unwrap();
        assert_eq!(c.breaks, [50.0]);
        assert_eq!(c.class_indices(), [0, 0, 1, 1]);
    }

    #[test]
    fn all_equal_values_share_class_zero() {
        for scheme in [Scheme::Quantile, Scheme::EqualInterval] {
            let c = classify(&input(&[5.0, 5.0, 5.0]), scheme, 4).unwrap();
            assert_eq!(c.class_indices(), [0, 0, 0]);
        }
    }

    #[test]
    fn no_data() {
        let values = vec![(SiteId::new("a"), None), (SiteId::new("b"), Some(3.0))];
        let c = classify(&values, Scheme::Quantile, 2).unwrap();
        assert_eq!(c.class_indices(), [-1, 0]);

        let c = classify(&[(SiteId::new("a"), None)], Scheme::Quantile, 3).unwrap();
        assert!(c.breaks.is_empty());
        assert_eq!(c.class_indices(), [-1]);
        assert!(classify(&[], Scheme::EqualInterval, 3).unwrap().classes.is_empty());
    }

    #[test]
    fn class_count_bounds() {
        assert!(classify(&input(&[1.0]), Scheme::Quantile, 1).is_err());
        assert!(classify(&input(&[1.0]), Scheme::Quantile, 10).is_err());
        assert!(classify(&input(&[1.0]), Scheme::Quantile, 9).is_ok());
    }

    proptest! {
        #[test]
        fn monotone_and_order_equivariant(
            values in prop::collection::vec(prop::option::weighted(0.9, -1e6f64..1e6), 0..60),
            k in 2usize..=9,
            equal in any::<bool>(),
            rotate in 0usize..60,
        ) {
            let scheme = if equal { Scheme::EqualInterval } else { Scheme::Quantile };
            let sites: Vec<(SiteId, Option<f64>)> =
                values.iter().enumerate().map(|(i, v)| (SiteId::new(format!("s{i}")), *v)).collect();
            let c = classify(&sites, scheme, k).unwrap();
            prop_assert!(c.breaks.windows(2).all(|w| w[0] <= w[1]));
            for (a, (_, ca)) in sites.iter().zip(&c.classes) {
                for (b, (_, cb)) in sites.iter().zip(&c.classes) {
                    if let (Some(va), Some(vb)) = (a.1, b.1) {
                        if va <= vb {
                            prop_assert!(ca <= cb);
                        }
                    }
                }
                prop_assert!(*ca >= -1 && *ca < k as i32);
            }
            let mut rotated = sites.clone();
            if !rotated.is_empty() {
                let r = rotate % rotated.len();
                rotated.rotate_left(r);
            }
            let c2 = classify(&rotated, scheme, k).unwrap();
            let lookup = |id: &SiteId| c.classes.iter().find(|(s, _)| s == id).unwrap().1;
            for (id, class) in &c2.classes {
                prop_assert_eq!(*class, lookup(id));
            }
        }
    }
}
