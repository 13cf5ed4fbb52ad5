//! Finitely generated abelian groups in normal form: `Z^r + Z_{q1} + ... + Z_{qs}`,
//! torsion kept as a sorted multiset of prime-power orders.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct AbelianGroup {
    free_rank: u32,
    torsion: Vec<u64>,
}

impl AbelianGroup {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn z() -> Self {
        Self::free(1)
    }

    pub fn z2() -> Self {
        Self::cyclic(2)
    }

    pub fn free(rank: u32) -> Self {
        AbelianGroup { free_rank: rank, torsion: Vec::new() }
    }

    /// Finite cyclic group of order `n`, split into its primary parts.
    /// `n = 1` is the trivial group; `n = 0` is rejected by [`AbelianGroup::try_cyclic`].
    pub fn cyclic(n: u64) -> Self {
        Self::try_cyclic(n).expect("cyclic order must be positive")
    }

    pub fn try_cyclic(n: u64) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidInput("cyclic group of order 0 (use Z for the free group)".into()));
        }
        Ok(AbelianGroup { free_rank: 0, torsion: prime_power_parts(n) })
    }

    /// Builds the normal form from arbitrary torsion orders (each ≥ 2).
    pub fn new(free_rank: u32, torsion: impl IntoIterator<Item = u64>) -> Result<Self, Error> {
        let mut parts = Vec::new();
        for q in torsion {
            if q < 2 {
                return Err(Error::InvalidInput(format!("torsion order {q} must be at least 2")));
            }
            parts.extend(prime_power_parts(q));
        }
        parts.sort_unstable();
        Ok(AbelianGroup { free_rank, torsion: parts })
    }

    pub fn free_rank(&self) -> u32 {
        self.free_rank
    }

    pub fn torsion(&self) -> &[u64] {
        &self.torsion
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Number of indecomposable cyclic summands.
    pub fn summand_count(&self) -> usize {
        self.free_rank as usize + self.torsion.len()
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut torsion = Vec::with_capacity(self.torsion.len() + other.torsion.len());
        let (mut i, mut j) = (0, 0);
        while i < self.torsion.len() && j < other.torsion.len() {
            if self.torsion[i] <= other.torsion[j] {
                torsion.push(self.torsion[i]);
                i += 1;
            } else {
                torsion.push(other.torsion[j]);
                j += 1;
            }
        }
        torsion.extend_from_slice(&self.torsion[i..]);
        torsion.extend_from_slice(&other.torsion[j..]);
        AbelianGroup { free_rank: self.free_rank + other.free_rank, torsion }
    }

    pub fn power(&self, n: u32) -> AbelianGroup {
        let mut torsion = Vec::with_capacity(self.torsion.len() * n as usize);
        for &q in &self.torsion {
            torsion.extend(std::iter::repeat(q).take(n as usize));
        }
        AbelianGroup { free_rank: self.free_rank * n, torsion }
    }

    pub fn is_isomorphic(&self, other: &AbelianGroup) -> bool {
        self == other
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        text.parse()
    }
}

/// Direct sum of an iterator of groups.
pub fn sum<'a>(groups: impl IntoIterator<Item = &'a AbelianGroup>) -> AbelianGroup {
    groups.into_iter().fold(AbelianGroup::zero(), |acc, g| acc.direct_sum(g))
}

fn prime_power_parts(mut n: u64) -> Vec<u64> {
    let mut parts = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut q = 1;
            while n % p == 0 {
                n /= p;
                q *= p;
            }
            parts.push(q);
        }
        p += 1;
    }
    if n > 1 {
        parts.push(n);
    }
    parts.sort_unstable();
    parts
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => terms.push("Z".into()),
            r => terms.push(format!("Z^{r}")),
        }
        let mut i = 0;
        while i < self.torsion.len() {
            let q = self.torsion[i];
            let run = self.torsion[i..].iter().take_while(|&&x| x == q).count();
            terms.push(if run == 1 { format!("Z{q}") } else { format!("Z{q}^{run}") });
            i += run;
        }
        f.write_str(&terms.join("+"))
    }
}

impl FromStr for AbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = |why: &str| Error::InvalidInput(format!("cannot parse group {s:?}: {why}"));
        if s == "0" {
            return Ok(AbelianGroup::zero());
        }
        if s.is_empty() {
            return Err(bad("empty string"));
        }
        let mut acc = AbelianGroup::zero();
        for term in s.split('+') {
            let term = term.trim();
            let body = term.strip_prefix('Z').ok_or_else(|| bad("terms start with Z"))?;
            let (order, exp) = match body.split_once('^') {
                Some((o, e)) => (o, Some(e)),
                None => (body, None),
            };
            let n: u32 = match exp {
                Some(e) => e.parse().map_err(|_| bad("exponent is not a non-negative integer"))?,
                None => 1,
            };
            let piece = if order.is_empty() {
                AbelianGroup::free(1)
            } else {
                let q: u64 = order.parse().map_err(|_| bad("torsion order is not an integer"))?;
                if q < 2 {
                    return Err(bad("torsion order must be at least 2"));
                }
                AbelianGroup::cyclic(q)
            };
            acc = acc.direct_sum(&piece.power(n));
        }
        Ok(acc)
    }
}

impl Serialize for AbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for AbelianGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
