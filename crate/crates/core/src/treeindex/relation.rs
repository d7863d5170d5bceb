use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A relation `x ⊴ y` on a finite vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct FiniteRelation {
    vertices: BTreeSet<u64>,
    edges: BTreeSet<(u64, u64)>,
}

#[derive(Deserialize)]
struct RawRelation {
    vertices: Vec<u64>,
    #[serde(default)]
    edges: Vec<(u64, u64)>,
}

impl<'de> Deserialize<'de> for FiniteRelation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRelation::deserialize(d)?;
        FiniteRelation::new(raw.vertices, raw.edges).map_err(serde::de::Error::custom)
    }
}

impl FiniteRelation {
    pub fn new(vertices: impl IntoIterator<Item = u64>, edges: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let vertices: BTreeSet<u64> = vertices.into_iter().collect();
        let edges: BTreeSet<(u64, u64)> = edges.into_iter().collect();
        if let Some((x, y)) = edges.iter().find(|(x, y)| !vertices.contains(x) || !vertices.contains(y)) {
            return Err(Error::domain(format!("edge ({x}, {y}) leaves the vertex set")));
        }
        Ok(FiniteRelation { vertices, edges })
    }

    /// `x_1 ⊴ x_2 ⊴ .. ⊴ x_n` with consecutive edges only, on vertices `1..=n`.
    pub fn chain(n: u64) -> Self {
        FiniteRelation { vertices: (1..=n).collect(), edges: (1..n).map(|i| (i, i + 1)).collect() }
    }

    pub fn vertices(&self) -> &BTreeSet<u64> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(u64, u64)> {
        &self.edges
    }

    pub fn relates(&self, x: u64, y: u64) -> bool {
        self.edges.contains(&(x, y))
    }

    /// `H_0 = X`, `H_{α+1} = {x ∈ H_α : x ⊴ y for some y ∈ H_α}`, up to and
    /// including the first repeated set.
    pub fn derived_sets(&self) -> Vec<BTreeSet<u64>> {
        let mut out_edges: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &(x, y) in &self.edges {
            out_edges.entry(x).or_default().push(y);
        }
        let mut layers = vec![self.vertices.clone()];
        loop {
            let cur = layers.last().unwrap();
            let next: BTreeSet<u64> = cur
                .iter()
                .filter(|x| out_edges.get(x).is_some_and(|ys| ys.iter().any(|y| cur.contains(y))))
                .copied()
                .collect();
            let done = next == *cur;
            layers.push(next);
            if done {
                return layers;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HIndex {
    /// least `γ` with `H_{γ+1} = H_γ`
    pub h: usize,
    /// `H_h`; empty exactly when the relation is well founded
    pub stable: BTreeSet<u64>,
}

impl HIndex {
    pub fn well_founded(&self) -> bool {
        self.stable.is_empty()
    }
}

pub fn h_index(r: &FiniteRelation) -> HIndex {
    let mut layers = r.derived_sets();
    let stable = layers.pop().unwrap();
    HIndex { h: layers.len() - 1, stable }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationMapReport {
    /// `x ⊴ y ⇒ f(x) ⊴' f(y)`
    pub preserves: bool,
    /// every `f(H_α(r)) ⊆ H_α(r')`
    pub layers_map_into: bool,
    pub h_source: usize,
    pub h_target: usize,
    /// `h(r) <= h(r')`; only meaningful when `r'` is well founded
    pub index_bounded: Option<bool>,
}

impl RelationMapReport {
    /// The map preserves relations and every consequence checked holds.
    pub fn ok(&self) -> bool {
        self.preserves && self.layers_map_into && self.index_bounded != Some(false)
    }
}

/// Check that `f` preserves relations and, when it does, that it carries
/// derived sets into derived sets.
pub fn relation_map_check(r: &FiniteRelation, target: &FiniteRelation, f: &BTreeMap<u64, u64>) -> Result<RelationMapReport> {
    for x in &r.vertices {
        match f.get(x) {
            None => return Err(Error::domain(format!("map undefined at vertex {x}"))),
            Some(y) if !target.vertices.contains(y) => {
                return Err(Error::domain(format!("vertex {x} maps to {y}, outside the target")))
            }
            _ => {}
        }
    }
    let preserves = r.edges.iter().all(|(x, y)| target.relates(f[x], f[y]));
    let src = r.derived_sets();
    let dst = target.derived_sets();
    let (hs, ht) = (h_index(r), h_index(target));
    let layer = |layers: &[BTreeSet<u64>], a: usize| layers[a.min(layers.len() - 1)].clone();
    let depth = src.len().max(dst.len());
    let layers_map_into = (0..depth).all(|a| {
        let d = layer(&dst, a);
        layer(&src, a).iter().all(|x| d.contains(&f[x]))
    });
    let index_bounded = ht.well_founded().then_some(hs.h <= ht.h);
    Ok(RelationMapReport { preserves, layers_map_into, h_source: hs.h, h_target: ht.h, index_bounded })
}
