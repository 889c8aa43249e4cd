//! Two-feature binary concept streams on the unit square.
//!
//! Each family comes in two parameterisations (concept 1 and concept 2) of the
//! same boundary shape. A block of `base_size` points is drawn once and
//! repeated `replications` times.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StreamSource;
use crate::error::{Error, Result};
use crate::sample::{ClassId, Sample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Circle,
    Line,
    /// Vertical sine boundary.
    #[serde(alias = "sinev")]
    Sine,
    /// Higher-frequency, lower-amplitude sine boundary.
    #[serde(alias = "sineH", alias = "sine-h", alias = "sine_h")]
    SineH,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Circle => "circle",
            Family::Line => "line",
            Family::Sine => "sine",
            Family::SineH => "sineH",
        }
    }

    pub fn all() -> [Family; 4] {
        [Family::Circle, Family::Line, Family::Sine, Family::SineH]
    }

    /// Default boundary of concept 1 or 2.
    pub fn boundary(&self, concept: u8) -> Result<Boundary> {
        use std::f64::consts::PI;
        let b = match (self, concept) {
            (Family::Circle, 1) => Boundary::Circle {
                center: [0.5, 0.5],
                radius: 0.25,
            },
            (Family::Circle, 2) => Boundary::Circle {
                center: [0.5, 0.5],
                radius: 0.3,
            },
            (Family::Line, 1) => Boundary::Line {
                slope: -1.0,
                intercept: 1.0,
            },
            (Family::Line, 2) => Boundary::Line {
                slope: 0.5,
                intercept: 0.25,
            },
            (Family::Sine, 1) => Boundary::Sine {
                amplitude: 0.3,
                frequency: 3.0 * PI,
                phase: 0.0,
                offset: 0.5,
            },
            (Family::Sine, 2) => Boundary::Sine {
                amplitude: 0.3,
                frequency: 3.0 * PI,
                phase: PI,
                offset: 0.5,
            },
            (Family::SineH, 1) => Boundary::Sine {
                amplitude: 0.2,
                frequency: 6.0 * PI,
                phase: 0.0,
                offset: 0.5,
            },
            (Family::SineH, 2) => Boundary::Sine {
                amplitude: 0.2,
                frequency: 6.0 * PI,
                phase: PI,
                offset: 0.5,
            },
            (_, c) => {
                return Err(Error::Config(format!("concept must be 1 or 2, got {c}")));
            }
        };
        Ok(b)
    }
}

/// Decision boundary on `(x1, x2)`; class 1 is the inside of the circle or
/// the region above the curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Boundary {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Line {
        slope: f64,
        intercept: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
}

impl Boundary {
    pub fn label(&self, x1: f64, x2: f64) -> ClassId {
        let positive = match *self {
            Boundary::Circle { center, radius } => {
                let (dx, dy) = (x1 - center[0], x2 - center[1]);
                dx * dx + dy * dy < radius * radius
            }
            Boundary::Line { slope, intercept } => x2 > slope * x1 + intercept,
            Boundary::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => x2 > offset + amplitude * (frequency * x1 + phase).sin(),
        };
        usize::from(positive)
    }
}

fn default_base_size() -> usize {
    1000
}

fn default_replications() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub family: Family,
    pub concept: u8,
    #[serde(default = "default_base_size")]
    pub base_size: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Draw a fresh block for every replication instead of repeating the
    /// first one.
    #[serde(default)]
    pub redraw: bool,
    /// Overrides the family's default boundary for this concept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
}

impl SyntheticSpec {
    pub fn new(family: Family, concept: u8) -> Self {
        Self {
            family,
            concept,
            base_size: default_base_size(),
            replications: default_replications(),
            redraw: false,
            boundary: None,
        }
    }

    pub fn len(&self) -> usize {
        self.base_size * self.replications
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolved_boundary(&self) -> Result<Boundary> {
        match &self.boundary {
            Some(b) => Ok(b.clone()),
            None => self.family.boundary(self.concept),
        }
    }
}

fn draw_block(rng: &mut ChaCha8Rng, boundary: &Boundary, n: usize) -> Vec<Sample> {
    (0..n)
        .map(|_| {
            let x1: f64 = rng.gen();
            let x2: f64 = rng.gen();
            Sample::new(vec![x1, x2], boundary.label(x1, x2))
        })
        .collect()
}

/// Generates the replicated concept stream for `spec`.
pub fn gen_concept(spec: &SyntheticSpec, seed: u64) -> Result<StreamSource> {
    if spec.base_size == 0 || spec.replications == 0 {
        return Err(Error::Config(
            "base_size and replications must be at least 1".into(),
        ));
    }
    let boundary = spec.resolved_boundary()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = draw_block(&mut rng, &boundary, spec.base_size);
    let len = spec.len();
    let samples: Box<dyn Iterator<Item = Result<Sample>> + Send> = if spec.redraw {
        let (base_size, replications) = (spec.base_size, spec.replications);
        let rest = (1..replications).flat_map(move |_| draw_block(&mut rng, &boundary, base_size));
        Box::new(block.into_iter().chain(rest).map(Ok))
    } else {
        let replications = spec.replications;
        Box::new(std::iter::repeat_n(block, replications).flatten().map(Ok))
    };
    Ok(StreamSource::new(samples, Some(len), 2, Some(2)))
}
