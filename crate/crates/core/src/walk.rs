//! The continuous-time conjugacy-class walk coupled to its hypergraph.
//!
//! Every step draws a uniform element of the class, applies each of its
//! cycles to the permutation (longest first) and adds the same vertex set as
//! a hyperedge. Time is measured as `steps / n`; with Poissonization the
//! number of steps up to time `t` is drawn as `Poisson(t n)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class::{ClassError, ConjugacyClass};
use crate::hypergraph::{HyperComponents, HyperOptions};
use crate::perm::{PermError, Permutation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("coupling violated after step {step}: N = {cycles} < N̄ = {components}")]
    Coupling {
        step: u64,
        cycles: usize,
        components: usize,
    },
    #[error("time must be non-decreasing (at {current}, asked for {requested})")]
    TimeReversal { current: f64, requested: f64 },
}

/// Replica RNG: ChaCha8 keyed by the master seed, with the replica id
/// selecting the stream. Streams are independent and each replica's draws
/// do not depend on how many replicas run or in which order.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

/// Per-checkpoint observables of one replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub replica: u64,
    pub t: f64,
    pub steps: u64,
    /// `N`, cycles of the permutation.
    pub cycles: usize,
    /// `N̄`, components of the hypergraph.
    pub components: usize,
    /// `Λ`, largest cycle.
    pub largest_cycle: u32,
    /// `L`, largest component.
    pub largest_component: u32,
    pub frag: u64,
    pub frag_small: u64,
    /// `⌈(n − N) / K⌉`.
    pub lb_dist: u64,
}

#[derive(Debug, Clone)]
pub struct WalkState {
    class: ConjugacyClass,
    perm: Permutation,
    hyper: HyperComponents,
    steps: u64,
    time: f64,
    poissonize: bool,
    frag: u64,
    frag_small: u64,
    small_cutoff: u32,
    max_excess_cycles: usize,
    hit_threshold: Option<u32>,
    hit_step: Option<u64>,
    buf: Vec<u32>,
    lengths: Vec<u32>,
}

impl WalkState {
    pub fn new(class: ConjugacyClass, n: usize) -> Result<Self, WalkError> {
        Self::with_options(class, n, HyperOptions::default())
    }

    pub fn with_options(
        class: ConjugacyClass,
        n: usize,
        opts: HyperOptions,
    ) -> Result<Self, WalkError> {
        let support = class.support_size();
        if n < support {
            return Err(ClassError::TooSmall { support, n }.into());
        }
        let lengths = class.cycle_lengths();
        Ok(Self {
            perm: Permutation::identity(n)?,
            hyper: HyperComponents::with_options(n, opts),
            steps: 0,
            time: 0.0,
            poissonize: false,
            frag: 0,
            frag_small: 0,
            small_cutoff: (n as f64).sqrt().floor() as u32,
            max_excess_cycles: 0,
            hit_threshold: None,
            hit_step: None,
            buf: Vec::with_capacity(support),
            lengths,
            class,
        })
    }

    /// Draw step counts as Poisson increments in [`advance_to`](Self::advance_to).
    pub fn poissonized(mut self, on: bool) -> Self {
        self.poissonize = on;
        self
    }

    /// Record the first step after which `Λ > threshold`.
    pub fn track_largest_above(&mut self, threshold: u32) {
        self.hit_threshold = Some(threshold);
        self.hit_step = (self.perm.largest() > threshold).then_some(self.steps);
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn class(&self) -> &ConjugacyClass {
        &self.class
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn hypergraph(&self) -> &HyperComponents {
        &self.hyper
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Total fragmentations so far.
    pub fn frag_count(&self) -> u64 {
        self.frag
    }

    /// Fragmentations whose smaller piece is at most `⌊√n⌋`.
    pub fn frag_small_count(&self) -> u64 {
        self.frag_small
    }

    /// Running maximum of `N − N̄` over all completed steps.
    pub fn max_excess_cycles(&self) -> usize {
        self.max_excess_cycles
    }

    pub fn hit_step(&self) -> Option<u64> {
        self.hit_step
    }

    /// Apply `steps` uniform class elements.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R, steps: u64) -> Result<(), WalkError> {
        let n = self.n();
        for _ in 0..steps {
            self.class.sample_into(n, rng, &mut self.buf)?;
            let mut at = 0;
            for &len in &self.lengths {
                let cycle = &self.buf[at..at + len as usize];
                let (frag, frag_small, cutoff) = (&mut self.frag, &mut self.frag_small, self.small_cutoff);
                self.perm.apply_cycle_each(cycle, |e| {
                    if let Some(small) = e.smaller_piece() {
                        *frag += 1;
                        if small <= cutoff {
                            *frag_small += 1;
                        }
                    }
                })?;
                self.hyper
                    .add_hyperedge(cycle)
                    .expect("sampled cycles have distinct in-range points");
                at += len as usize;
            }
            self.steps += 1;
            let (cycles, components) = (self.perm.num_cycles(), self.hyper.components());
            if cycles < components {
                return Err(WalkError::Coupling {
                    step: self.steps,
                    cycles,
                    components,
                });
            }
            self.max_excess_cycles = self.max_excess_cycles.max(cycles - components);
            if let Some(threshold) = self.hit_threshold {
                if self.hit_step.is_none() && self.perm.largest() > threshold {
                    self.hit_step = Some(self.steps);
                }
            }
        }
        if !self.poissonize {
            self.time = self.steps as f64 / n as f64;
        }
        Ok(())
    }

    /// Run until time `t` (in units of `n` steps).
    pub fn advance_to<R: Rng + ?Sized>(&mut self, rng: &mut R, t: f64) -> Result<(), WalkError> {
        if t < self.time {
            return Err(WalkError::TimeReversal {
                current: self.time,
                requested: t,
            });
        }
        let n = self.n() as f64;
        let steps = if self.poissonize {
            let mean = (t - self.time) * n;
            if mean > 0.0 {
                Poisson::new(mean).expect("positive mean").sample(rng) as u64
            } else {
                0
            }
        } else {
            ((t * n).round() as u64).saturating_sub(self.steps)
        };
        self.advance(rng, steps)?;
        self.time = t;
        Ok(())
    }

    pub fn checkpoint(&self, replica: u64) -> TrajectoryRecord {
        let n = self.n() as u64;
        let k = u64::from(self.class.weight());
        let deficit = n - self.perm.num_cycles() as u64;
        TrajectoryRecord {
            replica,
            t: self.time,
            steps: self.steps,
            cycles: self.perm.num_cycles(),
            components: self.hyper.components(),
            largest_cycle: self.perm.largest(),
            largest_component: self.hyper.largest(),
            frag: self.frag,
            frag_small: self.frag_small,
            lb_dist: deficit.div_ceil(k),
        }
    }

    /// Every permutation cycle must sit inside one hypergraph component.
    pub fn audit_coupling(&self) -> Result<(), String> {
        let perm = &self.perm;
        for x in 0..self.n() as u32 {
            let y = perm.image(x);
            if self.hyper.root(x) != self.hyper.root(y) {
                return Err(format!("{x} and σ({x}) = {y} lie in different components"));
            }
        }
        if perm.num_cycles() < self.hyper.components() {
            return Err("N < N̄".into());
        }
        perm.audit()?;
        self.hyper.audit()
    }
}
