//! User-supplied integer sequences (map counts `M_n`, `C_k`) and the core-size
//! probability `p_{n,k} = k C_k / (n M_n) * [z^{n-1}] phi^n psi^{k-1} psi'`.
//!
//! File format: a header line `offset: <int>`, then one integer per line for
//! indices `offset, offset + 1, ...`. Blank lines and lines starting with `#`
//! are skipped.

use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::planar::{planar_core_exact, PlanarCoreQuery};
use crate::error::{Error, Result};
use crate::exact_series::BigCoefficient;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerSequence {
    pub offset: i64,
    pub values: Vec<BigInt>,
}

impl IntegerSequence {
    pub fn get(&self, index: i64) -> Option<&BigInt> {
        let i = index.checked_sub(self.offset)?;
        usize::try_from(i).ok().and_then(|i| self.values.get(i))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }
}

impl FromStr for IntegerSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty sequence file".into()))?;
        let offset = header
            .strip_prefix("offset:")
            .ok_or_else(|| Error::Parse(format!("expected \"offset: <int>\", found {header:?}")))?
            .trim()
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("bad offset: {e}")))?;
        let values = lines
            .map(|l| l.parse::<BigInt>().map_err(|e| Error::Parse(format!("bad integer {l:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntegerSequence { offset, values })
    }
}

/// `p_{n,k}` as an exact rational.
pub fn core_probability(q: &PlanarCoreQuery, m: &IntegerSequence, c: &IntegerSequence) -> Result<BigCoefficient> {
    let missing = |name: &str, i: u64| Error::InvalidInput(format!("{name}_{i} is not in the supplied sequence"));
    let mn = m.get(q.n as i64).ok_or_else(|| missing("M", q.n))?;
    let ck = c.get(q.k as i64).ok_or_else(|| missing("C", q.k))?;
    if mn.is_zero() {
        return Err(Error::InvalidInput(format!("M_{} = 0", q.n)));
    }
    let coeff = planar_core_exact(q)?;
    let ratio = BigRational::new(BigInt::from(q.k) * ck, BigInt::from(q.n) * mn);
    Ok(BigCoefficient::new(ratio * coeff.value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let s: IntegerSequence = "offset: 1\n# comment\n2\n\n10\n123456789012345678901234567890\n".parse().unwrap();
        assert_eq!(s.offset, 1);
        assert_eq!(s.get(2), Some(&BigInt::from(10)));
        assert!(s.get(0).is_none() && s.get(4).is_none());
        assert!("2\n3".parse::<IntegerSequence>().is_err());
        assert!("offset: 0\nx".parse::<IntegerSequence>().is_err());
    }

    #[test]
    fn probability_formula() {
        let m: IntegerSequence = "offset: 1\n2\n1\n4".parse().unwrap();
        let c: IntegerSequence = "offset: 1\n1\n5".parse().unwrap();
        let q = PlanarCoreQuery::new(3, 2).unwrap();
        // 2 * 5 / (3 * 4) * 6 = 5
        let p = core_probability(&q, &m, &c).unwrap();
        assert_eq!(p.to_f64(), Some(5.0));
        let far = PlanarCoreQuery::new(5, 2).unwrap();
        assert!(core_probability(&far, &m, &c).is_err());
    }
}
