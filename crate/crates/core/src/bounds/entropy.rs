//! Finite joint distributions and Shannon entropies in bits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::{Error, Rational, Result};

/// Probability mass: `f64` for approximate tables, [`Rational`] for exact
/// enumerations.
pub trait Mass: Copy + Debug + PartialOrd {
    fn zero() -> Self;
    fn plus(self, other: Self) -> Self;
    fn to_f64(self) -> f64;
    fn is_negative(self) -> bool;
    /// `−p·log2(p)`, zero at `p = 0`.
    fn surprisal(self) -> f64;
    fn is_unit_total(total: Self) -> bool;
}

impl Mass for f64 {
    fn zero() -> Self {
        0.0
    }

    fn plus(self, other: Self) -> Self {
        self + other
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn is_negative(self) -> bool {
        self < 0.0
    }

    fn surprisal(self) -> f64 {
        if self > 0.0 {
            -self * libm::log2(self)
        } else {
            0.0
        }
    }

    fn is_unit_total(total: Self) -> bool {
        (total - 1.0).abs() <= 1e-12
    }
}

impl Mass for Rational {
    fn zero() -> Self {
        Rational::ZERO
    }

    fn plus(self, other: Self) -> Self {
        self + other
    }

    fn to_f64(self) -> f64 {
        Rational::to_f64(&self)
    }

    fn is_negative(self) -> bool {
        Rational::is_negative(&self)
    }

    fn surprisal(self) -> f64 {
        if self.numerator() <= 0 {
            return 0.0;
        }
        // p·(log2 d − log2 n) avoids the cancellation in log2(n/d) for tiny p
        let n = self.numerator() as f64;
        let d = self.denominator() as f64;
        (n / d) * (libm::log2(d) - libm::log2(n))
    }

    fn is_unit_total(total: Self) -> bool {
        total == Rational::ONE
    }
}

/// Anything that can report the joint entropy of a set of named variables.
pub trait EntropySource {
    /// `H(vars)` in bits; repeated names count once, the empty set gives 0.
    fn joint_entropy(&self, vars: &[&str]) -> Result<f64>;
}

/// Finite distribution over tuples of named discrete variables. Values are
/// opaque `u64` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<P = f64> {
    names: Vec<String>,
    atoms: Vec<(Vec<u64>, P)>,
}

fn dedup<'a>(vars: &[&'a str]) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::with_capacity(vars.len());
    for v in vars {
        if !out.contains(v) {
            out.push(v);
        }
    }
    out
}

impl<P: Mass> JointDistribution<P> {
    /// Validates arity and mass and merges repeated tuples.
    pub fn new(names: Vec<String>, atoms: Vec<(Vec<u64>, P)>) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidDistribution(format!("variable `{n}` listed twice")));
            }
        }
        let mut merged: BTreeMap<Vec<u64>, P> = BTreeMap::new();
        let mut total = P::zero();
        for (values, p) in atoms {
            if values.len() != names.len() {
                return Err(Error::InvalidDistribution(format!(
                    "atom has {} values for {} variables",
                    values.len(),
                    names.len()
                )));
            }
            if p.is_negative() {
                return Err(Error::InvalidDistribution(format!("negative probability {p:?}")));
            }
            total = total.plus(p);
            let e = merged.entry(values).or_insert_with(P::zero);
            *e = e.plus(p);
        }
        if !P::is_unit_total(total) {
            return Err(Error::InvalidDistribution(format!("total mass {total:?} is not 1")));
        }
        Ok(JointDistribution { names, atoms: merged.into_iter().collect() })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn atoms(&self) -> &[(Vec<u64>, P)] {
        &self.atoms
    }

    pub fn has(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    /// Marginal over `vars` (in the given order).
    pub fn marginal(&self, vars: &[&str]) -> Result<BTreeMap<Vec<u64>, P>> {
        let cols = dedup(vars)
            .into_iter()
            .map(|v| self.column(v))
            .collect::<Result<Vec<_>>>()?;
        let mut out: BTreeMap<Vec<u64>, P> = BTreeMap::new();
        for (values, p) in &self.atoms {
            let key: Vec<u64> = cols.iter().map(|&c| values[c]).collect();
            let e = out.entry(key).or_insert_with(P::zero);
            *e = e.plus(*p);
        }
        Ok(out)
    }
}

impl JointDistribution<Rational> {
    /// Uniform weighting over enumerated outcomes: each tuple gets
    /// `count / total`.
    pub fn from_counts(names: Vec<String>, counts: BTreeMap<Vec<u64>, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        let atoms = counts
            .into_iter()
            .map(|(v, c)| (v, Rational::new(c as i128, total as i128)))
            .collect();
        Self::new(names, atoms)
    }
}

impl<P: Mass> EntropySource for JointDistribution<P> {
    fn joint_entropy(&self, vars: &[&str]) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        Ok(self.marginal(vars)?.values().map(|p| p.surprisal()).sum())
    }
}

/// Product of independent factors. A variable named in several factors is
/// the tuple of its parts, so its entropy splits across factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredJoint<P = f64> {
    factors: Vec<JointDistribution<P>>,
}

impl<P: Mass> FactoredJoint<P> {
    pub fn new(factors: Vec<JointDistribution<P>>) -> Self {
        FactoredJoint { factors }
    }

    pub fn factors(&self) -> &[JointDistribution<P>] {
        &self.factors
    }
}

impl<P: Mass> EntropySource for FactoredJoint<P> {
    fn joint_entropy(&self, vars: &[&str]) -> Result<f64> {
        let vars = dedup(vars);
        if let Some(v) = vars.iter().find(|v| !self.factors.iter().any(|f| f.has(v))) {
            return Err(Error::UnknownVariable((*v).into()));
        }
        let mut h = 0.0;
        for f in &self.factors {
            let local: Vec<&str> = vars.iter().copied().filter(|v| f.has(v)).collect();
            h += f.joint_entropy(&local)?;
        }
        Ok(h)
    }
}

/// `H(targets | given) = H(targets, given) − H(given)`.
pub fn entropy<S: EntropySource + ?Sized>(src: &S, targets: &[&str], given: &[&str]) -> Result<f64> {
    let mut all: Vec<&str> = targets.to_vec();
    all.extend_from_slice(given);
    Ok(src.joint_entropy(&all)? - src.joint_entropy(given)?)
}

/// `I(a; b | given)`.
pub fn mutual_information<S: EntropySource + ?Sized>(src: &S, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    fn cat<'a>(x: &[&'a str], y: &[&'a str]) -> Vec<&'a str> {
        let mut v = x.to_vec();
        v.extend_from_slice(y);
        v
    }
    let abz = cat(&cat(a, b), given);
    Ok(src.joint_entropy(&cat(a, given))? + src.joint_entropy(&cat(b, given))?
        - src.joint_entropy(&abz)?
        - src.joint_entropy(given)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    /// W1, W2 iid uniform bits and Z = W1 xor W2.
    fn xor_dist() -> JointDistribution<Rational> {
        let q = Rational::new(1, 4);
        let atoms = (0..4u64).map(|w| (vec![w & 1, w >> 1, (w & 1) ^ (w >> 1)], q)).collect();
        JointDistribution::new(names(&["W1", "W2", "Z"]), atoms).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let bit = JointDistribution::new(names(&["W1"]), vec![(vec![0], 0.5), (vec![1], 0.5)]).unwrap();
        assert!((entropy(&bit, &["W1"], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(entropy(&bit, &["W1"], &["W1"]).unwrap(), 0.0);

        let d = xor_dist();
        assert!((entropy(&d, &["W1"], &["Z"]).unwrap() - 1.0).abs() < 1e-12);
        assert!((entropy(&d, &["W1", "W2"], &["Z"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(mutual_information(&d, &["W1"], &["W2"], &[]).unwrap().abs() < 1e-12);
        assert!((mutual_information(&d, &["W1"], &["W2"], &["Z"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_variable() {
        let d = xor_dist();
        assert_eq!(entropy(&d, &["W3"], &[]), Err(Error::UnknownVariable("W3".into())));
    }

    #[test]
    fn rejects_bad_distributions() {
        let n = names(&["X"]);
        assert!(JointDistribution::new(n.clone(), vec![(vec![0], 0.5)]).is_err());
        assert!(JointDistribution::new(n.clone(), vec![(vec![0], 1.5), (vec![1], -0.5)]).is_err());
        assert!(JointDistribution::new(n.clone(), vec![(vec![0, 1], 1.0)]).is_err());
        assert!(JointDistribution::new(names(&["X", "X"]), vec![(vec![0, 1], 1.0)]).is_err());
        let exact = JointDistribution::new(n, vec![(vec![0], Rational::new(1, 3)), (vec![1], Rational::new(1, 3))]);
        assert!(exact.is_err());
    }

    #[test]
    fn merges_repeated_atoms() {
        let d = JointDistribution::new(names(&["X"]), vec![(vec![0], 0.25), (vec![0], 0.25), (vec![1], 0.5)]).unwrap();
        assert_eq!(d.atoms().len(), 2);
        assert!((d.joint_entropy(&["X"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factored_entropy_adds() {
        let bit = |name: &str| {
            JointDistribution::new(
                names(&[name]),
                vec![(vec![0], Rational::new(1, 2)), (vec![1], Rational::new(1, 2))],
            )
            .unwrap()
        };
        let both = FactoredJoint::new(vec![bit("A"), bit("B"), xor_dist()]);
        assert!((both.joint_entropy(&["A", "B"]).unwrap() - 2.0).abs() < 1e-12);
        assert!((both.joint_entropy(&["A", "W1", "W2", "Z"]).unwrap() - 3.0).abs() < 1e-12);
        assert!(both.joint_entropy(&["C"]).is_err());
    }
}
