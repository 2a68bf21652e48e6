//! Poisson flow arrivals over a demand pattern.

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemandKind {
    AllToAll,
    /// A random fixed-point-free permutation drawn from `seed`.
    Permutation { seed: u64 },
    /// Relative pair weights, row-major `nt x nt`; the diagonal is ignored.
    Matrix { weights: Vec<Vec<f64>> },
    /// Explicit flows; load and the size distribution are ignored.
    Trace { flows: Vec<Flow> },
}

/// Piecewise-linear empirical CDF over flow sizes in bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCdf {
    /// `(size_bytes, cumulative_probability)`, both nondecreasing, ending at 1.
    pub points: Vec<(f64, f64)>,
}

impl SizeCdf {
    /// Parses `size_bytes cdf` lines (space or comma separated). Blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = l.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 'size_bytes cdf', found {} field(s)", fields.len()),
                });
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("bad {what} '{s}'"),
                })
            };
            let size = num(fields[0], "size")?;
            let p = num(fields[1], "probability")?;
            if size <= 0.0 || !(0.0..=1.0).contains(&p) {
                return Err(Error::Parse {
                    line,
                    message: format!("size must be positive and cdf in [0, 1] (got {size}, {p})"),
                });
            }
            if let Some(&(ps, pp)) = points.last() {
                if size < ps || p < pp {
                    return Err(Error::Parse {
                        line,
                        message: "sizes and probabilities must be nondecreasing".into(),
                    });
                }
            }
            points.push((size, p));
        }
        match points.last() {
            None => Err(Error::Parse {
                line: 0,
                message: "empty CDF".into(),
            }),
            Some(&(_, p)) if (p - 1.0).abs() > 1e-9 => Err(Error::Parse {
                line: text.lines().count(),
                message: format!("CDF ends at {p}, expected 1"),
            }),
            _ => Ok(SizeCdf { points }),
        }
    }

    pub fn mean(&self) -> f64 {
        let (s0, p0) = self.points[0];
        let mut mean = s0 * p0;
        for w in self.points.windows(2) {
            let ((sa, pa), (sb, pb)) = (w[0], w[1]);
            mean += (pb - pa) * 0.5 * (sa + sb);
        }
        mean
    }

    pub fn sample(&self, u: f64) -> f64 {
        let (s0, p0) = self.points[0];
        if u <= p0 {
            return s0;
        }
        for w in self.points.windows(2) {
            let ((sa, pa), (sb, pb)) = (w[0], w[1]);
            if u <= pb {
                return if pb > pa { sa + (sb - sa) * (u - pa) / (pb - pa) } else { sb };
            }
        }
        self.points[self.points.len() - 1].0
    }
}

/// Web search flow sizes in 1460-byte packets, as widely used for
/// datacenter transport studies.
const WEBSEARCH_PACKETS: [(f64, f64); 12] = [
    (1.0, 0.0),
    (6.0, 0.15),
    (13.0, 0.2),
    (19.0, 0.3),
    (33.0, 0.4),
    (53.0, 0.53),
    (133.0, 0.6),
    (667.0, 0.7),
    (1333.0, 0.8),
    (3333.0, 0.9),
    (6667.0, 0.97),
    (20000.0, 1.0),
];

impl SizeCdf {
    pub fn websearch() -> Self {
        SizeCdf {
            points: WEBSEARCH_PACKETS.iter().map(|&(p, c)| (p * 1460.0, c)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FlowSizes {
    Fixed { bytes: f64 },
    Exponential { mean_bytes: f64 },
    /// Pareto with the given mean and tail index (> 1).
    Pareto { mean_bytes: f64, shape: f64 },
    Cdf(SizeCdf),
    Websearch,
}

impl FlowSizes {
    pub fn mean_bytes(&self) -> f64 {
        match self {
            FlowSizes::Fixed { bytes } => *bytes,
            FlowSizes::Exponential { mean_bytes } | FlowSizes::Pareto { mean_bytes, .. } => *mean_bytes,
            FlowSizes::Cdf(c) => c.mean(),
            FlowSizes::Websearch => SizeCdf::websearch().mean(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            FlowSizes::Fixed { bytes } => *bytes > 0.0,
            FlowSizes::Exponential { mean_bytes } => *mean_bytes > 0.0,
            FlowSizes::Pareto { mean_bytes, shape } => *mean_bytes > 0.0 && *shape > 1.0,
            FlowSizes::Cdf(c) => !c.points.is_empty(),
            FlowSizes::Websearch => true,
        };
        if ok && self.mean_bytes().is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid flow size distribution {self:?}")))
        }
    }
}

enum Sampler {
    Fixed(f64),
    Exp(Exp<f64>),
    Pareto(Pareto<f64>),
    Cdf(SizeCdf),
}

impl Sampler {
    fn new(sizes: &FlowSizes) -> Result<Self> {
        let bad = |e: String| Error::InvalidParameter(e);
        Ok(match sizes {
            FlowSizes::Fixed { bytes } => Sampler::Fixed(*bytes),
            FlowSizes::Exponential { mean_bytes } => {
                Sampler::Exp(Exp::new(1.0 / mean_bytes).map_err(|e| bad(e.to_string()))?)
            }
            FlowSizes::Pareto { mean_bytes, shape } => {
                let scale = mean_bytes * (shape - 1.0) / shape;
                Sampler::Pareto(Pareto::new(scale, *shape).map_err(|e| bad(e.to_string()))?)
            }
            FlowSizes::Cdf(c) => Sampler::Cdf(c.clone()),
            FlowSizes::Websearch => Sampler::Cdf(SizeCdf::websearch()),
        })
    }

    fn bytes(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Fixed(b) => *b,
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Pareto(d) => d.sample(rng),
            Sampler::Cdf(c) => c.sample(rng.random::<f64>()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub src: usize,
    pub dst: usize,
    /// seconds
    pub arrival: f64,
    pub bits: u64,
}

/// Reads `src,dst,arrival_us,bytes` rows. A header line, blank lines and
/// `#` comments are skipped.
pub fn parse_flow_trace(text: &str) -> Result<Vec<Flow>> {
    let mut flows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') || (flows.is_empty() && l.starts_with("src")) {
            continue;
        }
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected src,dst,arrival_us,bytes, found {} field(s)", f.len()),
            });
        }
        let bad = |what: &str, v: &str| Error::Parse {
            line,
            message: format!("bad {what} '{v}'"),
        };
        let src: usize = f[0].parse().map_err(|_| bad("src", f[0]))?;
        let dst: usize = f[1].parse().map_err(|_| bad("dst", f[1]))?;
        let at: f64 = f[2].parse().ok().filter(|v: &f64| *v >= 0.0 && v.is_finite()).ok_or_else(|| bad("arrival", f[2]))?;
        let bytes: f64 = f[3].parse().ok().filter(|v: &f64| *v > 0.0 && v.is_finite()).ok_or_else(|| bad("size", f[3]))?;
        flows.push(Flow {
            src,
            dst,
            arrival: at / 1e6,
            bits: (bytes * 8.0).round() as u64,
        });
    }
    Ok(flows)
}

/// A uniformly random permutation without fixed points.
pub fn random_derangement(n: usize, seed: u64) -> Vec<usize> {
    if n < 2 {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        p.shuffle(&mut rng);
        if p.iter().enumerate().all(|(i, &v)| i != v) {
            return p;
        }
    }
}

/// Relative weight of every ordered pair, summing to one.
pub fn pair_weights(kind: &DemandKind, nt: usize) -> Result<Vec<(usize, usize, f64)>> {
    let raw: Vec<(usize, usize, f64)> = match kind {
        DemandKind::AllToAll => (0..nt)
            .flat_map(|s| (0..nt).filter(move |&d| d != s).map(move |d| (s, d, 1.0)))
            .collect(),
        DemandKind::Permutation { seed } => random_derangement(nt, *seed)
            .into_iter()
            .enumerate()
            .filter(|(s, d)| s != d)
            .map(|(s, d)| (s, d, 1.0))
            .collect(),
        DemandKind::Trace { flows } => {
            let mut w = vec![0.0; nt * nt];
            for f in flows {
                if f.src >= nt || f.dst >= nt {
                    return Err(Error::InvalidParameter(format!("flow ({}, {}) outside the ToR set", f.src, f.dst)));
                }
                if f.src != f.dst {
                    w[f.src * nt + f.dst] += f.bits as f64;
                }
            }
            w.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(i, &x)| (i / nt, i % nt, x))
                .collect()
        }
        DemandKind::Matrix { weights } => {
            if weights.len() != nt || weights.iter().any(|r| r.len() != nt) {
                return Err(Error::InvalidParameter(format!("demand weights must be {nt}x{nt}")));
            }
            let mut v = Vec::new();
            for (s, row) in weights.iter().enumerate() {
                for (d, &w) in row.iter().enumerate() {
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::InvalidParameter(format!("weight {w} at ({s}, {d})")));
                    }
                    if s != d && w > 0.0 {
                        v.push((s, d, w));
                    }
                }
            }
            v
        }
    };
    let total: f64 = raw.iter().map(|p| p.2).sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    Ok(raw.into_iter().map(|(s, d, w)| (s, d, w / total)).collect())
}

/// Flows arriving in `[0, horizon)` seconds. The aggregate Poisson rate is
/// chosen so that offered bits per second equal `load * nt * server_cap`;
/// each arrival picks its pair in proportion to the pair weights.
pub fn generate_workload(
    kind: &DemandKind,
    load: f64,
    seed: u64,
    nt: usize,
    server_cap: f64,
    sizes: &FlowSizes,
    horizon: f64,
) -> Result<Vec<Flow>> {
    if !(0.0..=1.0).contains(&load) {
        return Err(Error::InvalidParameter(format!("load {load} outside [0, 1]")));
    }
    if let DemandKind::Trace { flows } = kind {
        pair_weights(kind, nt)?;
        let mut out: Vec<Flow> = flows
            .iter()
            .filter(|f| f.src != f.dst && f.arrival >= 0.0 && f.arrival < horizon && f.bits > 0)
            .cloned()
            .collect();
        out.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
        return Ok(out);
    }
    sizes.validate()?;
    let pairs = pair_weights(kind, nt)?;
    let offered = load * nt as f64 * server_cap;
    let mean_bits = sizes.mean_bytes() * 8.0;
    if offered <= 0.0 || pairs.is_empty() || horizon <= 0.0 {
        return Ok(Vec::new());
    }
    let rate = offered / mean_bits;
    let gaps = Exp::new(rate).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let pick = WeightedIndex::new(pairs.iter().map(|p| p.2)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let sampler = Sampler::new(sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flows = Vec::new();
    let mut t = 0.0;
    loop {
        t += gaps.sample(&mut rng);
        if t >= horizon {
            break;
        }
        let (src, dst, _) = pairs[pick.sample(&mut rng)];
        let bits = (sampler.bytes(&mut rng) * 8.0).round().max(8.0) as u64;
        flows.push(Flow { src, dst, arrival: t, bits });
    }
    Ok(flows)
}
