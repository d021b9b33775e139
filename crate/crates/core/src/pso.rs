//! Particle swarm minimization over a bounded box.
//!
//! Each step updates every particle with
//!
//! ```text
//! v <- inertia * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
//! x <- x + v
//! ```
//!
//! where `r1`, `r2` are fresh uniform draws per dimension. Velocities are
//! clamped to `+-v_max` and positions to the box; a coordinate that hits a
//! wall has its velocity component zeroed. Bests move only on strict
//! improvement.
//!
//! All random numbers for a step are drawn before fitness evaluation, so
//! evaluating particles in parallel gives the same trajectory as evaluating
//! them in order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AnfisError, Result};

/// Search hyper-parameters that do not depend on the problem's box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub n_particles: usize,
    /// Cognitive (personal-best) learning constant.
    pub c1: f64,
    /// Social (global-best) learning constant.
    pub c2: f64,
    /// Velocity carry-over. 1.0 is the plain update with no damping.
    pub inertia: f64,
    /// Velocity limit as a fraction of each dimension's range.
    pub v_max_fraction: f64,
    pub iterations: usize,
    /// Evaluate particle fitness on the rayon pool. Does not change results.
    pub parallel: bool,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            n_particles: 60,
            c1: 2.0,
            c2: 2.0,
            inertia: 1.0,
            v_max_fraction: 0.2,
            iterations: 1000,
            parallel: true,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(AnfisError::config("pso.n_particles", "must be at least 1"));
        }
        if !(self.c1.is_finite() && self.c1 > 0.0) {
            return Err(AnfisError::config("pso.c1", "must be finite and > 0"));
        }
        if !(self.c2.is_finite() && self.c2 > 0.0) {
            return Err(AnfisError::config("pso.c2", "must be finite and > 0"));
        }
        if !(self.inertia.is_finite() && self.inertia >= 0.0) {
            return Err(AnfisError::config("pso.inertia", "must be finite and >= 0"));
        }
        if !(self.v_max_fraction.is_finite() && self.v_max_fraction > 0.0) {
            return Err(AnfisError::config(
                "pso.v_max_fraction",
                "must be finite and > 0",
            ));
        }
        if self.iterations == 0 {
            return Err(AnfisError::config("pso.iterations", "must be at least 1"));
        }
        Ok(())
    }

    /// Attach a search box and seed.
    pub fn with_bounds(&self, bounds: Vec<(f64, f64)>, seed: u64) -> SwarmConfig {
        let v_max = bounds
            .iter()
            .map(|(lo, hi)| self.v_max_fraction * (hi - lo))
            .collect();
        SwarmConfig {
            n_particles: self.n_particles,
            c1: self.c1,
            c2: self.c2,
            inertia: self.inertia,
            v_max,
            iterations: self.iterations,
            seed,
            bounds,
            parallel: self.parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub n_particles: usize,
    pub c1: f64,
    pub c2: f64,
    pub inertia: f64,
    /// Per-dimension velocity limit.
    pub v_max: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
    /// Per-dimension `(lo, hi)`.
    pub bounds: Vec<(f64, f64)>,
    pub parallel: bool,
}

impl SwarmConfig {
    /// Default parameters over the given box.
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        PsoParams::default().with_bounds(bounds, 0)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        PsoParams {
            n_particles: self.n_particles,
            c1: self.c1,
            c2: self.c2,
            inertia: self.inertia,
            v_max_fraction: 1.0,
            iterations: self.iterations,
            parallel: self.parallel,
        }
        .validate()?;
        if self.bounds.is_empty() {
            return Err(AnfisError::config("pso.bounds", "search box has no dimensions"));
        }
        for (d, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(AnfisError::config(
                    format!("pso.bounds[{d}]"),
                    format!("need finite lo < hi, got ({lo}, {hi})"),
                ));
            }
        }
        if self.v_max.len() != self.bounds.len() {
            return Err(AnfisError::config(
                "pso.v_max",
                format!(
                    "expected {} entries, found {}",
                    self.bounds.len(),
                    self.v_max.len()
                ),
            ));
        }
        if let Some(d) = self.v_max.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(AnfisError::config(
                format!("pso.v_max[{d}]"),
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Fitness at `position`.
    pub fitness: f64,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub gbest_position: Vec<f64>,
    pub gbest_fitness: f64,
    /// `(iteration, gbest_fitness)` after each completed step.
    pub history: Vec<(usize, f64)>,
    pub iteration: usize,
}

#[inline]
fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        f64::INFINITY
    }
}

fn evaluate_all<F>(positions: &[Vec<f64>], fitness: &F, parallel: bool) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if parallel {
        positions.par_iter().map(|p| sanitize(fitness(p))).collect()
    } else {
        positions.iter().map(|p| sanitize(fitness(p))).collect()
    }
}

impl SwarmState {
    /// Random positions inside the box and random velocities within
    /// `+-v_max`. When `init` is given the first particle starts there
    /// (clamped to the box).
    pub fn initialize<F, R>(
        config: &SwarmConfig,
        fitness: &F,
        init: Option<&[f64]>,
        rng: &mut R,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
        R: Rng,
    {
        config.validate()?;
        let dim = config.dim();
        if let Some(p) = init {
            if p.len() != dim {
                return Err(AnfisError::Shape {
                    context: "initial particle",
                    expected: dim,
                    found: p.len(),
                });
            }
        }

        let mut positions = Vec::with_capacity(config.n_particles);
        let mut velocities = Vec::with_capacity(config.n_particles);
        for i in 0..config.n_particles {
            let pos: Vec<f64> = match init {
                Some(p) if i == 0 => p
                    .iter()
                    .zip(&config.bounds)
                    .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
                    .collect(),
                _ => config
                    .bounds
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..=hi))
                    .collect(),
            };
            let vel: Vec<f64> = config
                .v_max
                .iter()
                .map(|&vm| rng.random_range(-vm..=vm))
                .collect();
            positions.push(pos);
            velocities.push(vel);
        }

        let fits = evaluate_all(&positions, fitness, config.parallel);
        let particles: Vec<Particle> = positions
            .into_iter()
            .zip(velocities)
            .zip(fits)
            .map(|((position, velocity), f)| Particle {
                pbest_position: position.clone(),
                pbest_fitness: f,
                position,
                velocity,
                fitness: f,
            })
            .collect();

        let mut best = 0;
        for (i, p) in particles.iter().enumerate() {
            if p.pbest_fitness < particles[best].pbest_fitness {
                best = i;
            }
        }
        Ok(SwarmState {
            gbest_position: particles[best].pbest_position.clone(),
            gbest_fitness: particles[best].pbest_fitness,
            particles,
            history: Vec::new(),
            iteration: 0,
        })
    }
}

/// Advance the swarm by one iteration.
pub fn step<F, R>(state: &mut SwarmState, config: &SwarmConfig, fitness: &F, rng: &mut R)
where
    F: Fn(&[f64]) -> f64 + Sync,
    R: Rng,
{
    let dim = config.dim();

    // r1 and r2 for every particle, drawn up front in a fixed order.
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..state.particles.len())
        .map(|_| {
            let r1 = (0..dim).map(|_| rng.random::<f64>()).collect();
            let r2 = (0..dim).map(|_| rng.random::<f64>()).collect();
            (r1, r2)
        })
        .collect();

    let gbest = &state.gbest_position;
    for (p, (r1, r2)) in state.particles.iter_mut().zip(&draws) {
        for d in 0..dim {
            let x = p.position[d];
            let mut v = config.inertia * p.velocity[d]
                + config.c1 * r1[d] * (p.pbest_position[d] - x)
                + config.c2 * r2[d] * (gbest[d] - x);
            let vm = config.v_max[d];
            v = v.clamp(-vm, vm);
            let (lo, hi) = config.bounds[d];
            let mut nx = x + v;
            if nx < lo {
                nx = lo;
                v = 0.0;
            } else if nx > hi {
                nx = hi;
                v = 0.0;
            }
            p.position[d] = nx;
            p.velocity[d] = v;
        }
    }

    let positions: Vec<Vec<f64>> = state.particles.iter().map(|p| p.position.clone()).collect();
    let fits = evaluate_all(&positions, fitness, config.parallel);

    for (p, f) in state.particles.iter_mut().zip(fits) {
        p.fitness = f;
        if f < p.pbest_fitness {
            p.pbest_fitness = f;
            p.pbest_position.clone_from(&p.position);
        }
    }
    for p in &state.particles {
        if p.pbest_fitness < state.gbest_fitness {
            state.gbest_fitness = p.pbest_fitness;
            state.gbest_position.clone_from(&p.pbest_position);
        }
    }
    state.iteration += 1;
    state.history.push((state.iteration, state.gbest_fitness));
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// `(iteration, gbest_fitness)`, one entry per iteration.
    pub history: Vec<(usize, f64)>,
}

/// Initialize a swarm from `config.seed` and run `config.iterations` steps.
pub fn optimize<F>(config: &SwarmConfig, fitness: F, init: Option<&[f64]>) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = SwarmState::initialize(config, &fitness, init, &mut rng)?;
    for _ in 0..config.iterations {
        step(&mut state, config, &fitness, &mut rng);
    }
    Ok(PsoOutcome {
        best_position: state.gbest_position,
        best_fitness: state.gbest_fitness,
        history: state.history,
    })
}
