use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{normal_quantile, GroupKind, MarkerGroup, ScenarioSpec};
use crate::error::Result;
use crate::model::{MarkerCatalog, MarkerId, MutationProfile};
use crate::null::binomial;
use crate::rng::RngStream;

// Independent groups larger than this are sampled through outcome counts.
const PER_MARKER_LIMIT: usize = 64;

#[derive(Debug, Clone)]
struct PreparedGroup {
    group: MarkerGroup,
    offset: u32,
    /// Latent cutoff `Phi^-1(1 - p)` for equicorrelated blocks.
    threshold: f64,
    shared_scale: f64,
    own_scale: f64,
}

/// A scenario's markers laid out contiguously, group after group.
#[derive(Debug, Clone)]
pub struct Universe {
    groups: Vec<PreparedGroup>,
    n_markers: usize,
    distinct_p: Vec<f64>,
}

/// Mutated marker indices of the two tumors, each sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampledPair {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

impl SampledPair {
    /// Union of mutated markers with match flags, sorted by index.
    pub fn union(&self) -> Vec<(u32, bool)> {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(self.a.len() + self.b.len());
        while i < self.a.len() || j < self.b.len() {
            match (self.a.get(i), self.b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    out.push((x, true));
                    i += 1;
                    j += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    out.push((x, false));
                    i += 1;
                }
                (Some(&x), None) => {
                    out.push((x, false));
                    i += 1;
                }
                (_, Some(&y)) => {
                    out.push((y, false));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        out
    }

    pub fn n_matches(&self) -> usize {
        self.union().iter().filter(|m| m.1).count()
    }
}

impl Universe {
    pub fn new(groups: &[MarkerGroup]) -> Result<Self> {
        let mut prepared = Vec::with_capacity(groups.len());
        let mut offset = 0usize;
        let mut distinct_p = Vec::new();
        for g in groups {
            g.validate()?;
            let rho = g.rho.unwrap_or(0.0);
            let threshold = match g.kind {
                GroupKind::EquicorrelatedBlock => normal_quantile(1.0 - g.p)?,
                _ => f64::NAN,
            };
            prepared.push(PreparedGroup {
                group: *g,
                offset: u32::try_from(offset).expect("universe fits u32 indices"),
                threshold,
                shared_scale: rho.sqrt(),
                own_scale: (1.0 - rho).sqrt(),
            });
            offset += g.n_markers;
            distinct_p.push(g.p);
        }
        distinct_p.sort_by(f64::total_cmp);
        distinct_p.dedup();
        Ok(Self {
            groups: prepared,
            n_markers: offset,
            distinct_p,
        })
    }

    pub fn n_markers(&self) -> usize {
        self.n_markers
    }

    fn group_index(&self, marker: u32) -> usize {
        self.groups.partition_point(|g| g.offset <= marker) - 1
    }

    pub fn probability(&self, marker: u32) -> f64 {
        self.groups[self.group_index(marker)].group.p
    }

    /// Index of the marker's probability in [`Universe::p_signature`].
    pub fn p_class(&self, marker: u32) -> usize {
        let p = self.probability(marker);
        self.distinct_p.binary_search_by(|d| d.total_cmp(&p)).expect("present")
    }

    /// `(p, n_markers)` for each distinct probability, ordered by `p`.
    pub fn p_signature(&self) -> Vec<(f64, usize)> {
        self.distinct_p
            .iter()
            .map(|&p| {
                let n = self
                    .groups
                    .iter()
                    .filter(|g| g.group.p == p)
                    .map(|g| g.group.n_markers)
                    .sum();
                (p, n)
            })
            .collect()
    }

    pub fn marker_id(marker: u32) -> MarkerId {
        MarkerId::new(format!("M{marker:05}")).expect("nonempty")
    }

    pub fn catalog(&self) -> MarkerCatalog<f64> {
        MarkerCatalog::from_entries((0..self.n_markers as u32).map(|m| (Self::marker_id(m), self.probability(m))))
            .expect("unique generated ids")
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, xi: f64, rng: &mut R) -> SampledPair {
        let mut pair = SampledPair::default();
        for g in &self.groups {
            match g.group.kind {
                GroupKind::Independent => sample_independent(g, xi, rng, &mut pair),
                GroupKind::ExclusiveBlock => sample_exclusive(g, xi, rng, &mut pair),
                GroupKind::EquicorrelatedBlock => sample_equicorrelated(g, xi, rng, &mut pair),
            }
        }
        pair.a.sort_unstable();
        pair.b.sort_unstable();
        pair
    }
}

fn sample_independent<R: Rng + ?Sized>(g: &PreparedGroup, xi: f64, rng: &mut R, pair: &mut SampledPair) {
    let (n, p) = (g.group.n_markers, g.group.p);
    if n <= PER_MARKER_LIMIT {
        for k in 0..n as u32 {
            let id = g.offset + k;
            if rng.random_bool(xi) {
                if rng.random_bool(p) {
                    pair.a.push(id);
                    pair.b.push(id);
                }
            } else {
                if rng.random_bool(p) {
                    pair.a.push(id);
                }
                if rng.random_bool(p) {
                    pair.b.push(id);
                }
            }
        }
        return;
    }
    // Per-marker outcomes are i.i.d. over {both, a only, b only, neither}:
    // draw the outcome counts, then which markers carry them.
    let both = xi * p + (1.0 - xi) * p * p;
    let one_side = (1.0 - xi) * p * (1.0 - p);
    let n_both = binomial(rng, n, both);
    let n_a = binomial(rng, n - n_both, one_side / (1.0 - both));
    let n_b = binomial(rng, n - n_both - n_a, one_side / (1.0 - both - one_side));
    let k = n_both + n_a + n_b;
    if k == 0 {
        return;
    }
    let mut chosen = index::sample(rng, n, k).into_vec();
    chosen.shuffle(rng);
    for (slot, &m) in chosen.iter().enumerate() {
        let id = g.offset + m as u32;
        if slot < n_both {
            pair.a.push(id);
            pair.b.push(id);
        } else if slot < n_both + n_a {
            pair.a.push(id);
        } else {
            pair.b.push(id);
        }
    }
}

fn exclusive_draw<R: Rng + ?Sized>(g: &PreparedGroup, rng: &mut R) -> Option<u32> {
    let cell = (rng.random::<f64>() / g.group.p) as usize;
    (cell < g.group.n_markers).then(|| g.offset + cell as u32)
}

fn sample_exclusive<R: Rng + ?Sized>(g: &PreparedGroup, xi: f64, rng: &mut R, pair: &mut SampledPair) {
    if rng.random_bool(xi) {
        if let Some(id) = exclusive_draw(g, rng) {
            pair.a.push(id);
            pair.b.push(id);
        }
    } else {
        pair.a.extend(exclusive_draw(g, rng));
        pair.b.extend(exclusive_draw(g, rng));
    }
}

/// One latent vector `sqrt(rho) Z0 + sqrt(1 - rho) Z_i` of length `n`.
pub fn sample_latent_block<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let (shared, own) = (rho.sqrt(), (1.0 - rho).sqrt());
    let z0: f64 = rng.sample(StandardNormal);
    (0..n)
        .map(|_| shared * z0 + own * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn latent_mutations<R: Rng + ?Sized>(g: &PreparedGroup, rng: &mut R, out: &mut Vec<u32>) {
    let z0: f64 = rng.sample(StandardNormal);
    let base = g.shared_scale * z0;
    for k in 0..g.group.n_markers as u32 {
        let x = base + g.own_scale * rng.sample::<f64, _>(StandardNormal);
        if x > g.threshold {
            out.push(g.offset + k);
        }
    }
}

fn sample_equicorrelated<R: Rng + ?Sized>(g: &PreparedGroup, xi: f64, rng: &mut R, pair: &mut SampledPair) {
    if rng.random_bool(xi) {
        let start = pair.a.len();
        latent_mutations(g, rng, &mut pair.a);
        let shared = pair.a[start..].to_vec();
        pair.b.extend(shared);
    } else {
        latent_mutations(g, rng, &mut pair.a);
        latent_mutations(g, rng, &mut pair.b);
    }
}

/// Draws one tumor pair from a scenario, with generated marker ids `M00000`, `M00001`, ...
pub fn sample_tumor_pair(spec: &ScenarioSpec, stream: RngStream) -> Result<(MutationProfile, MutationProfile)> {
    spec.validate()?;
    let universe = Universe::new(&spec.groups)?;
    let pair = universe.sample_pair(spec.xi, &mut stream.rng());
    Ok((
        MutationProfile::new("a", pair.a.iter().map(|&m| Universe::marker_id(m))),
        MutationProfile::new("b", pair.b.iter().map(|&m| Universe::marker_id(m))),
    ))
}
