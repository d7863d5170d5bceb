use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dyadic::DyadicString;
use super::relation::{h_index, FiniteRelation};
use crate::error::{Error, Result};

/// How far a limit stage was expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    /// nested limit stages expanded with `width` summands; deeper ones use one
    pub depth: u32,
    /// summands kept from each fundamental sequence
    pub width: u64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { depth: 3, width: 4 }
    }
}

/// A finite forest given by parent links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct CfreTree {
    nodes: BTreeSet<u64>,
    parent: BTreeMap<u64, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncation: Option<Truncation>,
}

#[derive(Deserialize)]
struct RawTree {
    nodes: Vec<u64>,
    #[serde(default)]
    parent: BTreeMap<u64, u64>,
    #[serde(default)]
    truncation: Option<Truncation>,
}

impl<'de> Deserialize<'de> for CfreTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTree::deserialize(d)?;
        let mut t = CfreTree::new(raw.nodes, raw.parent).map_err(serde::de::Error::custom)?;
        t.truncation = raw.truncation;
        Ok(t)
    }
}

impl CfreTree {
    pub fn new(nodes: impl IntoIterator<Item = u64>, parent: BTreeMap<u64, u64>) -> Result<Self> {
        let nodes: BTreeSet<u64> = nodes.into_iter().collect();
        for (c, p) in &parent {
            if !nodes.contains(c) || !nodes.contains(p) {
                return Err(Error::domain(format!("parent link {c} -> {p} leaves the node set")));
            }
        }
        // every ancestor chain must end at a root within |nodes| steps
        for &start in &nodes {
            let mut x = start;
            let mut steps = 0;
            while let Some(&p) = parent.get(&x) {
                steps += 1;
                if steps > nodes.len() {
                    return Err(Error::domain(format!("parent links through {start} form a cycle")));
                }
                x = p;
            }
        }
        Ok(CfreTree { nodes, parent, truncation: None })
    }

    /// Nodes `1..=n`, each the parent of the next.
    pub fn chain(n: u64) -> Self {
        CfreTree { nodes: (1..=n).collect(), parent: (2..=n).map(|i| (i, i - 1)).collect(), truncation: None }
    }

    pub fn nodes(&self) -> &BTreeSet<u64> {
        &self.nodes
    }

    pub fn parent(&self) -> &BTreeMap<u64, u64> {
        &self.parent
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn roots(&self) -> Vec<u64> {
        self.nodes.iter().filter(|n| !self.parent.contains_key(n)).copied().collect()
    }

    /// Children of every node, ascending.
    pub fn children(&self) -> BTreeMap<u64, Vec<u64>> {
        let mut out: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for (&c, &p) in &self.parent {
            out.entry(p).or_default().push(c);
        }
        out
    }

    /// `x` lies strictly above `y`.
    pub fn is_ancestor(&self, x: u64, y: u64) -> bool {
        let mut cur = y;
        while let Some(&p) = self.parent.get(&cur) {
            if p == x {
                return true;
            }
            cur = p;
        }
        false
    }

    /// `x ⊴ y` iff `y` is a child of `x`.
    pub fn child_relation(&self) -> FiniteRelation {
        FiniteRelation::new(self.nodes.iter().copied(), self.parent.iter().map(|(&c, &p)| (p, c)))
            .expect("parent links stay inside the node set")
    }
}

/// Codes in the dyadic tree: the `i`-th child (ascending id) of a node coded
/// `c` gets `c·0^{i-1}1`; roots are the children of the code `1`.
pub fn embed_cfre(t: &CfreTree) -> BTreeMap<u64, DyadicString> {
    let children = t.children();
    let mut codes = BTreeMap::new();
    let mut stack: Vec<(u64, DyadicString)> = Vec::new();
    let place = |kids: &[u64], base: &DyadicString, stack: &mut Vec<(u64, DyadicString)>| {
        let mut prefix = base.clone();
        for &k in kids {
            let mut code = prefix.clone();
            code.push(true);
            stack.push((k, code));
            prefix.push(false);
        }
    };
    place(&t.roots(), &DyadicString::from_bits(vec![true]), &mut stack);
    while let Some((node, code)) = stack.pop() {
        if let Some(kids) = children.get(&node) {
            place(kids, &code, &mut stack);
        }
        codes.insert(node, code);
    }
    codes
}

/// `h` of the child relation: the number of nodes on a longest root-to-leaf path.
pub fn tree_rank(t: &CfreTree) -> usize {
    h_index(&t.child_relation()).h
}

/// `ω^{e_1} c_1 + .. + ω^{e_k} c_k` with `e_1 > .. > e_k` and every `c_i >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Default)]
#[serde(transparent)]
pub struct OrdinalCNF {
    terms: Vec<(u32, u64)>,
}

impl<'de> Deserialize<'de> for OrdinalCNF {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OrdinalCNF::new(Vec::<(u32, u64)>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl OrdinalCNF {
    pub fn new(terms: Vec<(u32, u64)>) -> Result<Self> {
        if terms.iter().any(|&(_, c)| c == 0) {
            return Err(Error::domain("Cantor normal form coefficients must be positive"));
        }
        if terms.windows(2).any(|w| w[0].0 <= w[1].0) {
            return Err(Error::domain("Cantor normal form exponents must strictly decrease"));
        }
        Ok(OrdinalCNF { terms })
    }

    pub fn zero() -> Self {
        OrdinalCNF::default()
    }

    pub fn finite(n: u64) -> Self {
        OrdinalCNF { terms: if n == 0 { vec![] } else { vec![(0, n)] } }
    }

    pub fn omega_pow(e: u32) -> Self {
        OrdinalCNF { terms: vec![(e, 1)] }
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|&(e, _)| e == 0)
    }

    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|&(e, _)| e > 0)
    }

    /// `β` with `β + 1 = self`.
    pub fn predecessor(&self) -> Option<Self> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().unwrap();
        last.1 -= 1;
        if last.1 == 0 {
            terms.pop();
        }
        Some(OrdinalCNF { terms })
    }

    /// `n`-th term of the fundamental sequence of a limit:
    /// `.. + ω^e c` becomes `.. + ω^e (c-1) + ω^{e-1} n`.
    pub fn fundamental(&self, n: u64) -> Option<Self> {
        if !self.is_limit() || n == 0 {
            return None;
        }
        let mut terms = self.terms.clone();
        let (e, c) = terms.pop().unwrap();
        if c > 1 {
            terms.push((e, c - 1));
        }
        terms.push((e - 1, n));
        Some(OrdinalCNF { terms })
    }
}

impl fmt::Display for OrdinalCNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(e, c)| {
                let base = match e {
                    0 => return c.to_string(),
                    1 => "w".to_string(),
                    _ => format!("w^{e}"),
                };
                if c == 1 {
                    base
                } else {
                    format!("{base}*{c}")
                }
            })
            .collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for OrdinalCNF {
    type Err = Error;

    /// Accepts sums like `w^2*3+w+5` (`ω` may replace `w`).
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('ω', "w");
        if s == "0" || s.is_empty() {
            return Ok(OrdinalCNF::zero());
        }
        let mut terms = Vec::new();
        for part in s.split('+') {
            let (base, coef) = match part.split_once('*') {
                Some((b, c)) => (b, c.parse::<u64>().map_err(|_| Error::domain(format!("bad coefficient in '{part}'")))?),
                None => (part, 1),
            };
            let e = if let Some(exp) = base.strip_prefix("w^") {
                if exp.contains('w') {
                    return Err(Error::domain(format!("'{part}' is at least w^w; only ordinals below w^w are supported")));
                }
                exp.parse::<u32>().map_err(|_| Error::domain(format!("bad exponent in '{part}'")))?
            } else if base == "w" {
                1
            } else {
                let n = base.parse::<u64>().map_err(|_| Error::domain(format!("cannot read '{part}' as an ordinal term")))?;
                if part.contains('*') {
                    return Err(Error::domain(format!("cannot read '{part}' as an ordinal term")));
                }
                terms.push((0, n));
                continue;
            };
            terms.push((e, coef));
        }
        terms.retain(|&(_, c)| c > 0);
        OrdinalCNF::new(terms)
    }
}

struct Forest(Vec<Forest>);

struct Builder {
    nodes: usize,
    cap: usize,
    width: u64,
}

impl Builder {
    fn build(&mut self, alpha: &OrdinalCNF, depth: u32) -> Result<Vec<Forest>> {
        if alpha.is_zero() {
            return Ok(Vec::new());
        }
        if let Some(beta) = alpha.predecessor() {
            let below = self.build(&beta, depth)?;
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::SizeCap { what: "tree nodes".into(), needed: self.nodes as u128, cap: self.cap as u128 });
            }
            return Ok(vec![Forest(below)]);
        }
        let width = if depth > 0 { self.width } else { 1 };
        let mut out = Vec::new();
        for n in 1..=width {
            let term = alpha.fundamental(n).expect("limit ordinal");
            out.extend(self.build(&term, depth.saturating_sub(1))?);
        }
        Ok(out)
    }
}

/// Largest tree `build_t_alpha` will produce.
pub const MAX_TREE_NODES: usize = 1 << 20;

/// Finite approximant of `T_α`: `T_0` is empty, `T_{β+1}` puts one new root
/// above all of `T_β`, and a limit takes the disjoint union of the trees of
/// the first `width` terms of its fundamental sequence.
pub fn build_t_alpha(alpha: &OrdinalCNF, truncation: Truncation) -> Result<CfreTree> {
    if truncation.width == 0 {
        return Err(Error::domain("truncation width must be positive"));
    }
    let mut b = Builder { nodes: 0, cap: MAX_TREE_NODES, width: truncation.width };
    let forest = b.build(alpha, truncation.depth)?;
    let mut tree = CfreTree { truncation: Some(truncation), ..CfreTree::default() };
    let mut next = 1u64;
    fn assign(f: &Forest, parent: Option<u64>, next: &mut u64, tree: &mut CfreTree) {
        let id = *next;
        *next += 1;
        tree.nodes.insert(id);
        if let Some(p) = parent {
            tree.parent.insert(id, p);
        }
        for child in &f.0 {
            assign(child, Some(id), next, tree);
        }
    }
    for root in &forest {
        assign(root, None, &mut next, &mut tree);
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_examples() {
        let single = CfreTree::new([4], BTreeMap::new()).unwrap();
        assert_eq!(embed_cfre(&single)[&4].to_string(), "11");
        let fork = CfreTree::new([1, 2, 3], [(2, 1), (3, 1)].into()).unwrap();
        let codes = embed_cfre(&fork);
        assert_eq!(codes[&2].to_string(), "111");
        assert_eq!(codes[&3].to_string(), "1101");
        assert!(!codes[&2].is_prefix_of(&codes[&3]) && !codes[&3].is_prefix_of(&codes[&2]));
        let chain = embed_cfre(&CfreTree::chain(3));
        assert!(chain[&1].is_strict_prefix_of(&chain[&2]) && chain[&2].is_strict_prefix_of(&chain[&3]));
    }

    #[test]
    fn cycles_rejected() {
        assert!(CfreTree::new([1, 2], [(1, 2), (2, 1)].into()).is_err());
        assert!(CfreTree::new([1], [(1, 5)].into()).is_err());
    }

    #[test]
    fn ranks() {
        assert_eq!(tree_rank(&CfreTree::chain(1)), 1);
        assert_eq!(tree_rank(&CfreTree::chain(6)), 6);
        assert_eq!(tree_rank(&CfreTree::default()), 0);
    }

    #[test]
    fn cnf_parsing() {
        let a: OrdinalCNF = "w^2*3+w+5".parse().unwrap();
        assert_eq!(a.terms(), &[(2, 3), (1, 1), (0, 5)]);
        assert_eq!(a.to_string(), "w^2*3+w+5");
        assert_eq!("ω".parse::<OrdinalCNF>().unwrap(), OrdinalCNF::omega_pow(1));
        assert!("w^w".parse::<OrdinalCNF>().is_err());
        assert!("w+w^2".parse::<OrdinalCNF>().is_err());
        let j: OrdinalCNF = serde_json::from_str("[[1,2],[0,1]]").unwrap();
        assert_eq!(j.to_string(), "w*2+1");
        assert_eq!(serde_json::to_string(&j).unwrap(), "[[1,2],[0,1]]");
    }

    #[test]
    fn fundamental_sequences() {
        let w2: OrdinalCNF = "w^2".parse().unwrap();
        assert_eq!(w2.fundamental(3).unwrap().to_string(), "w*3");
        let w3: OrdinalCNF = "w*3".parse().unwrap();
        assert_eq!(w3.fundamental(2).unwrap().to_string(), "w*2+2");
        assert!(OrdinalCNF::finite(4).fundamental(1).is_none());
        assert_eq!(OrdinalCNF::finite(4).predecessor(), Some(OrdinalCNF::finite(3)));
    }

    #[test]
    fn t_alpha_examples() {
        let tr = Truncation { depth: 2, width: 4 };
        let t3 = build_t_alpha(&OrdinalCNF::finite(3), tr).unwrap();
        assert_eq!(t3.len(), 3);
        assert_eq!(tree_rank(&t3), 3);
        assert_eq!(t3.roots().len(), 1);
        assert!(build_t_alpha(&OrdinalCNF::zero(), tr).unwrap().is_empty());
        let w = build_t_alpha(&OrdinalCNF::omega_pow(1), tr).unwrap();
        let mut heights: Vec<usize> = w
            .roots()
            .iter()
            .map(|&r| w.nodes().iter().filter(|&&n| n == r || w.is_ancestor(r, n)).count())
            .collect();
        heights.sort();
        assert_eq!(heights, vec![1, 2, 3, 4]);
        assert_eq!(w.truncation(), Some(tr));
        let w1 = build_t_alpha(&"w+1".parse().unwrap(), tr).unwrap();
        assert_eq!(tree_rank(&w1), 5);
    }

    #[test]
    fn tree_json() {
        let t: CfreTree = serde_json::from_str(r#"{"nodes":[1,2,3],"parent":{"2":1,"3":1}}"#).unwrap();
        assert_eq!(t.children()[&1], vec![2, 3]);
        let back: CfreTree = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
