//! Seeded generation of uniform and geometric random k-SAT instances.
//!
//! Every instance is a pure function of its [`GenParams`]. The random stream
//! is ChaCha8 seeded from the 64-bit instance seed, and draws happen in a
//! fixed order:
//!
//! * uniform: per clause, `k` partial Fisher–Yates draws over the variables,
//!   then `k` polarity bits;
//! * geometric: all variable coordinates (axis by axis, each axis over all
//!   variables), then all clause coordinates in the same order, then `k`
//!   polarity bits per clause in clause order.
//!
//! Coordinates are 53-bit uniform doubles in `[0, 1)`. Duplicate clauses are
//! never filtered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{Clause, Formula, GenerationMeta, Lit, Model, Var};
use crate::spatial::{BackendPolicy, Nearest, SpatialError, SpatialIndex};
use crate::torus::TorusPoint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("clause length k must be at least 1")]
    ZeroK,
    #[error("clause length k = {k} exceeds the variable count n = {n}")]
    KExceedsN { k: usize, n: u32 },
    #[error("the geometric model needs a dimension of at least 1")]
    MissingDimension,
    #[error("the uniform model takes no dimension")]
    UnexpectedDimension,
    #[error("parameters are for the {0} model")]
    WrongModel(Model),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// Parameters of one random instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenParams {
    pub model: Model,
    pub k: usize,
    pub n: u32,
    pub m: usize,
    pub dimension: Option<u32>,
    pub seed: u64,
}

impl GenParams {
    pub fn uniform(k: usize, n: u32, m: usize, seed: u64) -> Self {
        GenParams { model: Model::Uniform, k, n, m, dimension: None, seed }
    }

    pub fn geometric(k: usize, n: u32, m: usize, dimension: u32, seed: u64) -> Self {
        GenParams { model: Model::Geometric, k, n, m, dimension: Some(dimension), seed }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.k == 0 {
            return Err(GenError::ZeroK);
        }
        if self.k > self.n as usize {
            return Err(GenError::KExceedsN { k: self.k, n: self.n });
        }
        match (self.model, self.dimension) {
            (Model::Uniform, None) | (Model::Geometric, Some(1..)) => Ok(()),
            (Model::Uniform, Some(_)) => Err(GenError::UnexpectedDimension),
            (Model::Geometric, _) => Err(GenError::MissingDimension),
        }
    }

    fn meta(&self) -> GenerationMeta {
        GenerationMeta::new(self.model, self.dimension, self.seed).expect("validated parameters")
    }
}

/// Torus positions behind a geometric instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    dim: usize,
    // point-major: variable_coords[i * dim + axis] is variable i + 1
    variable_coords: Vec<f64>,
    clause_coords: Vec<f64>,
}

impl Layout {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn num_variables(&self) -> usize {
        self.variable_coords.len() / self.dim
    }

    pub fn num_clauses(&self) -> usize {
        self.clause_coords.len() / self.dim
    }

    pub fn variable_point(&self, var: Var) -> TorusPoint {
        let i = var.offset();
        TorusPoint::from_slice_unchecked(&self.variable_coords[i * self.dim..(i + 1) * self.dim])
    }

    pub fn clause_point(&self, index: usize) -> TorusPoint {
        TorusPoint::from_slice_unchecked(&self.clause_coords[index * self.dim..(index + 1) * self.dim])
    }
}

/// SplitMix64 output for state `master_seed` after `index + 1` increments:
/// the golden-ratio increment `0x9E3779B97F4A7C15` followed by the standard
/// finalizer (shifts 30/27/31, multipliers `0xBF58476D1CE4E5B9` and
/// `0x94D049BB133111EB`). For a fixed index this is a bijection on seeds.
pub fn derive_instance_seed(master_seed: u64, instance_index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(instance_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `round_half_up(density * n)`, the clause count for a target density.
///
/// A tiny epsilon absorbs binary representation error, so that e.g. a
/// density of 0.905 at n = 100 maps to 91.
pub fn clauses_for_density(density: f64, n: u32) -> usize {
    let exact = density * n as f64;
    (exact + 0.5 + 1e-9).floor().max(0.0) as usize
}

/// Draws a uniform random k-SAT formula.
pub fn generate_uniform(params: &GenParams) -> Result<Formula, GenError> {
    params.validate()?;
    if params.model != Model::Uniform {
        return Err(GenError::WrongModel(params.model));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n;
    let k = params.k;
    // Partial Fisher–Yates. The pool is not restored between clauses: from any
    // fixed arrangement the first k slots after k swaps are a uniform k-subset.
    let mut pool: Vec<u32> = (1..=n).collect();
    let mut clauses = Vec::with_capacity(params.m);
    for _ in 0..params.m {
        for i in 0..k {
            let j = rng.gen_range(i as u32..n) as usize;
            pool.swap(i, j);
        }
        let lits = pool[..k]
            .iter()
            .map(|&v| {
                let negated = rng.gen::<bool>();
                Lit::new(Var::new(v).expect("pool holds 1..=n"), negated)
            })
            .collect();
        clauses.push(Clause::new(lits));
    }
    Ok(Formula::new_unchecked(n, k, clauses, Some(params.meta())))
}

fn sample_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<f64> {
    let mut coords = vec![0.0; count * dim];
    for axis in 0..dim {
        for i in 0..count {
            coords[i * dim + axis] = rng.gen::<f64>();
        }
    }
    coords
}

/// Draws a geometric random k-SAT formula: each clause takes the `k`
/// variables nearest to it on the torus.
pub fn generate_geometric(params: &GenParams) -> Result<(Formula, Layout), GenError> {
    params.validate()?;
    if params.model != Model::Geometric {
        return Err(GenError::WrongModel(params.model));
    }
    let dim = params.dimension.expect("validated") as usize;
    let n = params.n as usize;
    let k = params.k;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let variable_coords = sample_points(&mut rng, n, dim);
    let clause_coords = sample_points(&mut rng, params.m, dim);

    let labels: Vec<Var> = (0..n).map(Var::from_offset).collect();
    let index = SpatialIndex::from_flat(variable_coords.clone(), labels, dim, BackendPolicy::Auto)?;

    let mut nearest = Nearest::new(k);
    let mut clauses = Vec::with_capacity(params.m);
    for point in clause_coords.chunks_exact(dim) {
        index.k_nearest_into(point, k, &mut nearest)?;
        clauses.push(nearest.labels().collect::<Vec<_>>());
    }
    let clauses = clauses
        .into_iter()
        .map(|vars| Clause::new(vars.into_iter().map(|v| Lit::new(v, rng.gen::<bool>())).collect()))
        .collect();

    let formula = Formula::new_unchecked(params.n, k, clauses, Some(params.meta()));
    Ok((formula, Layout { dim, variable_coords, clause_coords }))
}

/// Dispatches on the model; the layout is present for geometric instances.
pub fn generate(params: &GenParams) -> Result<(Formula, Option<Layout>), GenError> {
    match params.model {
        Model::Uniform => generate_uniform(params).map(|f| (f, None)),
        Model::Geometric => generate_geometric(params).map(|(f, l)| (f, Some(l))),
    }
}
