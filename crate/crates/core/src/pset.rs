//! The exponent set P = {α(γl₁ − l₂)/(γ−α) : 0 ≤ l₂ ≤ l₁} ∩ [0,1), its
//! classification, and the boundary-layer schedule.

use num_rational::Rational64;
use serde::Serialize;

use crate::params::ModelParams;

/// Merge tolerance for exponents that are not exact rationals.
pub const MERGE_TOL: f64 = 1e-12;
/// Distinct float exponents closer than this are reported as near collisions.
pub const NEAR_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "l", rename_all = "lowercase")]
pub enum Tag {
    /// From the phase expansion: l₂ = 1.
    Pha(usize),
    /// From the amplitude expansion: l₂ = 0.
    Amp(usize),
    /// Realised as p_j + p_k with j, k ≥ 1.
    Int,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", content = "tags", rename_all = "lowercase")]
pub enum Class {
    Base,
    Pha(usize),
    Amp(usize),
    Int,
    Resonant(Vec<Tag>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    pub value: f64,
    pub exact: Option<Rational64>,
}

impl Exponent {
    fn new(alpha: crate::params::Real, gamma: crate::params::Real, l1: i64, l2: i64) -> Self {
        let exact = match (alpha.exact(), gamma.exact()) {
            (Some(a), Some(g)) => Some(a * (g * l1 - l2) / (g - a)),
            _ => None,
        };
        let (a, g) = (alpha.value(), gamma.value());
        let value = match exact {
            Some(q) => *q.numer() as f64 / *q.denom() as f64,
            None => a * (g * l1 as f64 - l2 as f64) / (g - a),
        };
        Exponent { value, exact }
    }

    pub fn same(&self, other: &Exponent) -> bool {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => (self.value - other.value).abs() <= MERGE_TOL,
        }
    }

    fn add(&self, other: &Exponent) -> Exponent {
        Exponent {
            value: self.value + other.value,
            exact: self.exact.zip(other.exact).map(|(a, b)| a + b),
        }
    }

    fn below_one(&self) -> bool {
        match self.exact {
            Some(q) => q < Rational64::from_integer(1),
            None => self.value < 1.0 - MERGE_TOL,
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = ser.serialize_struct("Exponent", 2)?;
        s.serialize_field("value", &self.value)?;
        s.serialize_field("exact", &self.exact.map(|q| [*q.numer(), *q.denom()]))?;
        s.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PEntry {
    pub p: Exponent,
    /// All (l₁, l₂) realising p.
    pub provenance: Vec<(usize, usize)>,
    pub tags: Vec<Tag>,
    pub class: Class,
}

#[derive(Clone, Debug, Serialize)]
pub struct PSet {
    /// entries[0] is p₀ = 0.
    pub entries: Vec<PEntry>,
    pub n: usize,
    pub l1_max: usize,
    /// True when exact rational arithmetic was used throughout.
    pub exact: bool,
    /// Pairs of distinct float exponents closer than `NEAR_TOL`.
    pub near_collisions: Vec<(f64, f64)>,
    /// Tags of exponent 1 itself (initial data of the equ correction).
    pub equ_tags: Vec<Tag>,
    pub note: Option<String>,
}

impl PSet {
    /// The exponent 1, exact when the set is.
    pub fn one(&self) -> Exponent {
        Exponent { value: 1.0, exact: self.exact.then(|| Rational64::from_integer(1)) }
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.p.value).collect()
    }

    /// Ordered pairs (j, k), j, k ≥ 1, with p_j + p_k = target.
    pub fn pairs_summing_to(&self, target: &Exponent) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 1..self.entries.len() {
            for k in 1..self.entries.len() {
                if self.entries[j].p.add(&self.entries[k].p).same(target) {
                    out.push((j, k));
                }
            }
        }
        out
    }

    /// Pairs (i, j) with p_i + p_j < 1 but not in P; empty when closed.
    pub fn closure_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.entries.len() {
            for j in i..self.entries.len() {
                let s = self.entries[i].p.add(&self.entries[j].p);
                if s.below_one() && !self.entries.iter().any(|e| e.p.same(&s)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Exponents carrying both a pha and an amp tag (never expected).
    pub fn pha_amp_resonances(&self) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| {
                let t = &self.entries[i].tags;
                t.iter().any(|t| matches!(t, Tag::Pha(_))) && t.iter().any(|t| matches!(t, Tag::Amp(_)))
            })
            .collect()
    }
}

fn exponent_one(params: &ModelParams) -> Exponent {
    Exponent { value: 1.0, exact: params.alpha.exact().zip(params.gamma.exact()).map(|_| Rational64::from_integer(1)) }
}

fn initial_tags(params: &ModelParams, target: &Exponent, l1_max: usize) -> Vec<Tag> {
    let mut tags = Vec::new();
    for l in 1..=l1_max {
        if Exponent::new(params.alpha, params.gamma, l as i64, 1).same(target) {
            tags.push(Tag::Pha(l));
        }
        if Exponent::new(params.alpha, params.gamma, l as i64, 0).same(target) {
            tags.push(Tag::Amp(l));
        }
    }
    tags
}

pub fn build_pset(params: &ModelParams) -> PSet {
    let (a, g) = (params.alpha(), params.gamma());
    let exact = params.alpha.exact().is_some() && params.gamma.exact().is_some();
    // the smallest increment is α(γ−1)/(γ−α), reached by (1,1)
    let l1_max = ((g - a) / (a * (g - 1.0))).ceil().max(0.0) as usize + 1;
    let one = exponent_one(params);
    let equ_tags_for = |p: &PSet| {
        let mut t = initial_tags(params, &one, p.l1_max);
        if !p.pairs_summing_to(&one).is_empty() {
            t.push(Tag::Int);
        }
        t
    };
    let base = PEntry {
        p: Exponent { value: 0.0, exact: exact.then(|| Rational64::from_integer(0)) },
        provenance: vec![(0, 0)],
        tags: Vec::new(),
        class: Class::Base,
    };
    if a >= 1.0 {
        let mut p = PSet {
            entries: vec![base],
            n: 0,
            l1_max,
            exact,
            near_collisions: Vec::new(),
            equ_tags: Vec::new(),
            note: Some("alpha >= 1: no corrections below order h".into()),
        };
        p.equ_tags = equ_tags_for(&p);
        return p;
    }

    let mut entries = vec![base];
    for l1 in 1..=l1_max {
        for l2 in 0..=l1 {
            let p = Exponent::new(params.alpha, params.gamma, l1 as i64, l2 as i64);
            if !p.below_one() {
                continue;
            }
            match entries.iter_mut().find(|e| e.p.same(&p)) {
                Some(e) => e.provenance.push((l1, l2)),
                None => entries.push(PEntry { p, provenance: vec![(l1, l2)], tags: Vec::new(), class: Class::Int }),
            }
        }
    }
    entries.sort_by(|x, y| x.p.value.total_cmp(&y.p.value));

    let mut near_collisions = Vec::new();
    if !exact {
        for w in entries.windows(2) {
            if w[1].p.value - w[0].p.value < NEAR_TOL {
                near_collisions.push((w[0].p.value, w[1].p.value));
            }
        }
        if !near_collisions.is_empty() {
            log::warn!("exponent set has {} near collisions", near_collisions.len());
        }
    }

    let mut set = PSet { entries, n: 0, l1_max, exact, near_collisions, equ_tags: Vec::new(), note: None };
    set.n = set.entries.len() - 1;
    for i in 1..set.entries.len() {
        let mut tags = Vec::new();
        for &(l1, l2) in &set.entries[i].provenance {
            match l2 {
                1 => tags.push(Tag::Pha(l1)),
                0 => tags.push(Tag::Amp(l1)),
                _ => {}
            }
        }
        if !set.pairs_summing_to(&set.entries[i].p).is_empty() {
            tags.push(Tag::Int);
        }
        let class = match tags.as_slice() {
            [Tag::Pha(l)] => Class::Pha(*l),
            [Tag::Amp(l)] => Class::Amp(*l),
            [Tag::Int] | [] => Class::Int,
            _ => Class::Resonant(tags.clone()),
        };
        set.entries[i].tags = tags;
        set.entries[i].class = class;
    }
    set.equ_tags = equ_tags_for(&set);
    set
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerRow {
    pub j: usize,
    /// 1 − t ~ ε^exponent.
    pub exponent: f64,
    /// τ ~ h^tau_exponent on the same layer.
    pub tau_exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerTable {
    pub rows: Vec<LayerRow>,
    pub first_layer: f64,
    pub final_layer: f64,
    /// τ₀ = h^{α/(γ−α)}.
    pub initial_tau_exponent: f64,
    /// α = 1: the initial time and the first layer coincide.
    pub merged: bool,
    /// α < 1: the first layer precedes the initial time.
    pub transposed: bool,
}

pub fn layer_schedule(params: &ModelParams, j_max: usize) -> LayerTable {
    let (a, g) = (params.alpha(), params.gamma());
    let rows = (1..=j_max)
        .map(|j| {
            let jf = j as f64;
            LayerRow { j, exponent: (jf * a - 1.0) / (jf * g - 1.0), tau_exponent: 1.0 / (jf * g - 1.0) }
        })
        .collect();
    LayerTable {
        rows,
        first_layer: (a - 1.0) / (g - 1.0),
        final_layer: a / g,
        initial_tau_exponent: a / (g - a),
        merged: a == 1.0,
        transposed: a < 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Real;

    fn set(g: Real, a: Real) -> PSet {
        build_pset(&ModelParams::new(4, g, a, 1.0).unwrap())
    }

    #[test]
    fn rational_example() {
        let p = set(Real::ratio(2, 1), Real::ratio(1, 3));
        let ex: Vec<_> = p.entries.iter().map(|e| e.p.exact.unwrap()).collect();
        let want: Vec<_> = (0..5).map(|k| Rational64::new(k, 5)).collect();
        assert_eq!(ex, want);
        assert_eq!(p.n, 4);
        assert_eq!(p.entries[1].class, Class::Pha(1));
        assert_eq!(p.entries[2].class, Class::Resonant(vec![Tag::Amp(1), Tag::Int]));
        assert!(p.closure_violations().is_empty());
        assert!(p.pha_amp_resonances().is_empty());
        assert_eq!(p.pairs_summing_to(&p.entries[3].p), vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn alpha_at_least_one_is_trivial() {
        let p = set(Real::ratio(2, 1), Real::ratio(1, 1));
        assert_eq!(p.n, 0);
        assert_eq!(p.equ_tags, vec![Tag::Pha(1)]);
        let q = set(Real::ratio(2, 1), Real::ratio(3, 2));
        assert!(q.equ_tags.is_empty());
    }

    #[test]
    fn layers() {
        let t = layer_schedule(&ModelParams::new(5, 3.0, 2.0, 1.0).unwrap(), 2);
        assert!((t.rows[0].exponent - 0.5).abs() < 1e-15);
        assert!((t.rows[1].exponent - 0.6).abs() < 1e-15);
        assert!((t.final_layer - 2.0 / 3.0).abs() < 1e-15);
    }
}
