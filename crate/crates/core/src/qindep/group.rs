use std::collections::HashMap;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::{common_tier, QindepError};
use crate::numkit::{NumericReal, Rational, Real, Tier};

#[derive(Clone, Debug)]
pub struct GroupElement {
    /// Exponent of each generator.
    pub word: Vec<i32>,
    pub value: Real,
}

impl GroupElement {
    pub fn length(&self) -> u32 {
        self.word.iter().map(|e| e.unsigned_abs()).sum()
    }
}

/// The products `prod g_i^{e_i}` with `sum |e_i| <= radius`, one entry per
/// distinct value, ordered by word length and then by exponent vector.
#[derive(Clone, Debug)]
pub struct GroupSlice {
    pub generators: Vec<Real>,
    pub radius: u32,
    pub tier: Tier,
    pub elements: Vec<GroupElement>,
}

impl GroupSlice {
    /// The trivial group `{1}`.
    pub fn trivial(tier: Tier) -> Self {
        let one = match tier {
            Tier::Symbolic => Real::rational(Rational::from_integer(1.into())),
            Tier::Numeric => Real::Numeric(NumericReal::from_i64(1, crate::numkit::DEFAULT_PRECISION).expect("valid precision")),
        };
        Self { generators: Vec::new(), radius: 0, tier, elements: vec![GroupElement { word: Vec::new(), value: one }] }
    }

    pub fn values(&self) -> Vec<Real> {
        self.elements.iter().map(|e| e.value.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The element with exponent vector `word`, if it is in the slice.
    pub fn find_word(&self, word: &[i32]) -> Option<&GroupElement> {
        self.elements.iter().find(|e| e.word == word)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("slice serializes")
    }
}

impl Serialize for GroupSlice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            word: &'a [i32],
            value: String,
        }
        let mut seq = s.serialize_seq(Some(self.elements.len()))?;
        for e in &self.elements {
            seq.serialize_element(&Entry { word: &e.word, value: e.value.canonical() })?;
        }
        seq.end()
    }
}

/// Every exponent vector of length `rank` with `sum |e_i| <= radius`, sorted
/// by word length and then lexicographically.
pub fn words_in_ball(rank: usize, radius: u32) -> Vec<Vec<i32>> {
    fn rec(prefix: &mut Vec<i32>, left: i32, rank: usize, out: &mut Vec<Vec<i32>>) {
        if prefix.len() == rank {
            out.push(prefix.clone());
            return;
        }
        for e in -left..=left {
            prefix.push(e);
            rec(prefix, left - e.abs(), rank, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(rank), radius as i32, rank, &mut out);
    out.sort_by_key(|w| (w.iter().map(|e| e.unsigned_abs()).sum::<u32>(), w.clone()));
    out
}

fn word_value(generators: &[Real], word: &[i32], one: &Real) -> Result<Real, QindepError> {
    let mut acc = one.clone();
    for (g, &e) in generators.iter().zip(word) {
        if e != 0 {
            acc = acc.mul(&g.powi(e)?)?;
        }
    }
    Ok(acc)
}

/// The word ball of radius `radius` in the group generated by `generators`.
///
/// Symbolic values are deduplicated exactly, keeping the shortest word.
/// Numeric values within relative `2^(-p/2)` of each other are reported as
/// a collision, since they signal a multiplicative relation.
pub fn expand_group(generators: &[Real], radius: u32) -> Result<GroupSlice, QindepError> {
    let tier = common_tier(generators)?;
    for (i, g) in generators.iter().enumerate() {
        if g.is_positive() != Some(true) {
            return Err(QindepError::NonPositiveGenerator(i));
        }
        if tier == Tier::Symbolic && g.powi(-1).is_err() {
            return Err(QindepError::NotInvertible(i));
        }
    }
    let precision = generators.iter().map(Real::default_precision).min().unwrap_or(crate::numkit::DEFAULT_PRECISION);
    let one = match tier {
        Tier::Symbolic => Real::rational(Rational::from_integer(1.into())),
        Tier::Numeric => Real::Numeric(NumericReal::from_i64(1, precision)?),
    };
    let mut elements: Vec<GroupElement> = Vec::new();
    match tier {
        Tier::Symbolic => {
            let mut seen: HashMap<String, usize> = HashMap::new();
            for word in words_in_ball(generators.len(), radius) {
                let value = word_value(generators, &word, &one)?;
                let key = value.canonical();
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key, elements.len());
                elements.push(GroupElement { word, value });
            }
        }
        Tier::Numeric => {
            for word in words_in_ball(generators.len(), radius) {
                let value = word_value(generators, &word, &one)?;
                elements.push(GroupElement { word, value });
            }
            let collisions = numeric_collisions(&elements, precision)?;
            if !collisions.is_empty() {
                return Err(QindepError::Collision(collisions));
            }
        }
    }
    Ok(GroupSlice { generators: generators.to_vec(), radius, tier, elements })
}

fn numeric_collisions(elements: &[GroupElement], precision: usize) -> Result<Vec<(Vec<i32>, Vec<i32>)>, QindepError> {
    let values: Vec<&NumericReal> = elements.iter().filter_map(|e| e.value.as_numeric()).collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].cmp_value(values[b]));
    let tol = NumericReal::from_i64(2, precision)?.powi(-((precision / 2) as i32))?;
    let mut out = Vec::new();
    for pair in order.windows(2) {
        let (a, b) = (values[pair[0]], values[pair[1]]);
        let gap = b.sub(a).abs();
        let scale = if a.abs().cmp_value(&b.abs()).is_gt() { a.abs() } else { b.abs() };
        if gap.cmp_value(&scale.mul(&tol)).is_le() {
            let (i, j) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            out.push((elements[i].word.clone(), elements[j].word.clone()));
        }
    }
    Ok(out)
}
