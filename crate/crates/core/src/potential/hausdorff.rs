//! Upper bounds for Hausdorff pre-measures by greedy coverings.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use super::riesz::{distance, RieszOrder};
use super::sets::{for_each_index, CompactSetSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Covering {
    pub balls: Vec<Ball>,
    /// Largest admissible radius.
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HausdorffEstimate {
    pub beta: f64,
    pub eps: f64,
    /// `Σ (2 r_i)^β` over the covering; `+∞` for `β < 0`.
    pub value: f64,
    pub sample_points: usize,
    pub sample_spacing: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covering: Option<Covering>,
}

/// Radii `eps·2^{-j}`, `j = 0..=HAUSDORFF_LEVELS`.
pub const HAUSDORFF_LEVELS: u32 = 3;

#[derive(Debug, PartialEq)]
struct Key(f64, Reverse<usize>);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Greedy covering estimate of `inf{Σ (2r_i)^β : A ⊆ ⋃ B(x_i, r_i), r_i ≤ eps}`.
///
/// The set is sampled on a grid; a candidate ball of radius `r` only claims
/// samples within `r - s√k/2` (`s` the spacing, `k` the piece dimension), so
/// the chosen balls cover the set itself and not just the samples. The result
/// is an upper bound for the pre-measure at scale `eps`.
pub fn hausdorff_premeasure(set: &CompactSetSpec, beta: RieszOrder, eps: f64) -> Result<HausdorffEstimate> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain("eps must be positive"));
    }
    set.validate()?;
    let b = beta.value();
    let d = set.dimension;
    let finest = eps * 0.5f64.powi(HAUSDORFF_LEVELS as i32);
    let spacing = finest / (2.0 * (d as f64).sqrt());
    if b < 0.0 {
        return Ok(HausdorffEstimate {
            beta: b,
            eps,
            value: f64::INFINITY,
            sample_points: 0,
            sample_spacing: spacing,
            covering: None,
        });
    }
    let points = set.sample_points(spacing)?;
    let k = set.piece_dimension();
    let inflation = spacing * (k as f64).sqrt() / 2.0;

    // candidates: for each level, balls centred on a lattice fine enough that
    // the claimed balls cover space; keyed deterministically
    let mut candidates: BTreeMap<(u32, Vec<i64>), Vec<usize>> = BTreeMap::new();
    let mut radii = vec![];
    for j in 0..=HAUSDORFF_LEVELS {
        let r = eps * 0.5f64.powi(j as i32);
        let claim = r - inflation;
        let step = 2.0 * claim / (d as f64).sqrt();
        radii.push((r, claim, step));
        for (pi, p) in points.iter().enumerate() {
            let lo: Vec<i64> = p.iter().map(|x| ((x - claim) / step).floor() as i64).collect();
            let counts: Vec<usize> = p
                .iter()
                .zip(&lo)
                .map(|(x, l)| (((x + claim) / step).ceil() as i64 - l + 1) as usize)
                .collect();
            for_each_index(&counts, |idx| {
                let site: Vec<i64> = lo.iter().zip(idx).map(|(l, i)| l + *i as i64).collect();
                let c: Vec<f64> = site.iter().map(|s| *s as f64 * step).collect();
                if distance(&c, p) <= claim {
                    candidates.entry((j, site)).or_default().push(pi);
                }
            });
        }
    }
    let candidates: Vec<((u32, Vec<i64>), Vec<usize>)> = candidates.into_iter().collect();
    let cost = |c: usize| (2.0 * radii[candidates[c].0 .0 as usize].0).powf(b);

    let mut covered = vec![false; points.len()];
    let mut remaining = points.len();
    let mut heap: BinaryHeap<Key> = (0..candidates.len())
        .map(|c| Key(candidates[c].1.len() as f64 / cost(c), Reverse(c)))
        .collect();
    let mut chosen = vec![];
    while remaining > 0 {
        let Some(Key(_, Reverse(c))) = heap.pop() else {
            return Err(Error::domain("covering candidates exhausted before the set was covered"));
        };
        let gain = candidates[c].1.iter().filter(|p| !covered[**p]).count();
        if gain == 0 {
            continue;
        }
        let key = Key(gain as f64 / cost(c), Reverse(c));
        if heap.peek().is_some_and(|top| *top > key) {
            heap.push(key);
            continue;
        }
        for &p in &candidates[c].1 {
            if !covered[p] {
                covered[p] = true;
                remaining -= 1;
            }
        }
        chosen.push(c);
    }
    let value = chosen.iter().map(|&c| cost(c)).sum();
    let balls = chosen
        .iter()
        .map(|&c| {
            let ((j, site), _) = &candidates[c];
            let (r, _, step) = radii[*j as usize];
            Ball {
                center: site.iter().map(|s| *s as f64 * step).collect(),
                radius: r,
            }
        })
        .collect();
    Ok(HausdorffEstimate {
        beta: b,
        eps,
        value,
        sample_points: points.len(),
        sample_spacing: spacing,
        covering: Some(Covering { balls, scale: eps }),
    })
}
