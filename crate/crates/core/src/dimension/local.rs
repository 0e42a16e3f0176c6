//! Empirical pointwise dimension from ball masses of a sampled cloud.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lyapunov::{ExpandingMap, GaussMap};
use crate::numeric::{linear_fit, mean_std, task_rng};
use crate::{Error, Result};

/// Points per parallel generation chunk.
const CHUNK: usize = 4096;

/// A sample of a measure on the line or the plane.
#[derive(Clone, Debug)]
pub enum Cloud {
    Line(Vec<f64>),
    Plane(Vec<[f64; 2]>),
}

impl Cloud {
    pub fn len(&self) -> usize {
        match self {
            Cloud::Line(v) => v.len(),
            Cloud::Plane(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `x` column (or the points themselves on the line).
    pub fn first_coordinate(&self) -> Cloud {
        match self {
            Cloud::Line(v) => Cloud::Line(v.clone()),
            Cloud::Plane(v) => Cloud::Line(v.iter().map(|p| p[0]).collect()),
        }
    }

    /// CSV with a header row, one point per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Cloud::Line(v) => {
                out.push_str("x\n");
                for x in v {
                    out.push_str(&format!("{x:.17e}\n"));
                }
            }
            Cloud::Plane(v) => {
                out.push_str("x,y\n");
                for p in v {
                    out.push_str(&format!("{:.17e},{:.17e}\n", p[0], p[1]));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalDimensionParams {
    pub centers: usize,
    /// Radii run over `2^{-j}` for `j_min ≤ j ≤ j_max`.
    pub j_min: u32,
    pub j_max: u32,
    /// Smallest neighbour count (centre excluded) for a radius to be used.
    pub min_count: usize,
}

impl Default for LocalDimensionParams {
    fn default() -> Self {
        Self { centers: 1000, j_min: 6, j_max: 18, min_count: 50 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDimensionEstimate {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    /// Pooled slope refitted on the finer half of each centre's radii.
    pub upper_half_mean: f64,
    pub upper_half_std: f64,
    pub centers_used: usize,
    pub centers_requested: usize,
    pub j_min: u32,
    pub j_max: u32,
    /// Finest `j` used by any centre.
    pub finest_j_used: u32,
    #[serde(skip)]
    pub slopes: Vec<f64>,
}

impl LocalDimensionEstimate {
    /// `|upper half - full range| < 2 pooled std`.
    pub fn scaling_stable(&self) -> bool {
        (self.upper_half_mean - self.mean).abs() < 2.0 * self.std
    }
}

struct CenterFit {
    slope: f64,
    upper: Option<f64>,
    finest: u32,
}

/// Per-centre least-squares slope of `log μ(B(z, r))` against `log r`,
/// pooled over centres drawn from the cloud itself. Ball masses leave the
/// centre out; balls are closed and Euclidean in the plane.
pub fn local_dimension(cloud: &Cloud, params: &LocalDimensionParams, seed: u64) -> Result<LocalDimensionEstimate> {
    let m = cloud.len();
    if m < 2 || params.centers == 0 || params.j_min > params.j_max {
        return Err(Error::InvalidParameter("need two points, one centre and j_min ≤ j_max".into()));
    }
    let mut rng = task_rng(seed, 0);
    let centers: Vec<usize> = (0..params.centers).map(|_| rng.gen_range(0..m)).collect();
    let radii: Vec<f64> = (params.j_min..=params.j_max).map(|j| (-(j as f64)).exp2()).collect();
    let total = (m - 1) as f64;

    let counts: Vec<Vec<usize>> = match cloud {
        Cloud::Line(v) => {
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            centers
                .par_iter()
                .map(|&c| {
                    let z = v[c];
                    radii
                        .iter()
                        .map(|r| {
                            let lo = sorted.partition_point(|p| *p < z - r);
                            let hi = sorted.partition_point(|p| *p <= z + r);
                            hi - lo - 1
                        })
                        .collect()
                })
                .collect()
        }
        Cloud::Plane(v) => {
            let mut sorted = v.clone();
            sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
            let r_max = radii[0];
            centers
                .par_iter()
                .map(|&c| {
                    let z = v[c];
                    let lo = sorted.partition_point(|p| p[0] < z[0] - r_max);
                    let hi = sorted.partition_point(|p| p[0] <= z[0] + r_max);
                    let mut d2: Vec<f64> = sorted[lo..hi]
                        .iter()
                        .map(|p| (p[0] - z[0]).powi(2) + (p[1] - z[1]).powi(2))
                        .filter(|d| *d <= r_max * r_max)
                        .collect();
                    d2.sort_by(f64::total_cmp);
                    radii.iter().map(|r| d2.partition_point(|d| *d <= r * r) - 1).collect()
                })
                .collect()
        }
    };

    let fits: Vec<CenterFit> = counts
        .iter()
        .filter_map(|row| {
            let (mut xs, mut ys, mut js) = (Vec::new(), Vec::new(), Vec::new());
            for (idx, &n) in row.iter().enumerate() {
                if n >= params.min_count {
                    xs.push(radii[idx].ln());
                    ys.push((n as f64 / total).ln());
                    js.push(params.j_min + idx as u32);
                }
            }
            if xs.len() < 3 {
                return None;
            }
            let (slope, _, _) = linear_fit(&xs, &ys)?;
            let half = xs.len() / 2;
            let upper = linear_fit(&xs[half..], &ys[half..]).map(|f| f.0);
            Some(CenterFit { slope, upper, finest: *js.last().unwrap() })
        })
        .collect();
    if fits.is_empty() {
        return Err(Error::InsufficientCounts);
    }
    let slopes: Vec<f64> = fits.iter().map(|f| f.slope).collect();
    let uppers: Vec<f64> = fits.iter().filter_map(|f| f.upper).collect();
    let (mean, std) = mean_std(&slopes);
    let (upper_half_mean, upper_half_std) = mean_std(&uppers);
    Ok(LocalDimensionEstimate {
        mean,
        std,
        stderr: std / (slopes.len() as f64).sqrt(),
        upper_half_mean,
        upper_half_std,
        centers_used: slopes.len(),
        centers_requested: params.centers,
        j_min: params.j_min,
        j_max: params.j_max,
        finest_j_used: fits.iter().map(|f| f.finest).max().unwrap(),
        slopes,
    })
}

pub(crate) fn generate<T: Send, F>(m: usize, seed: u64, point: F) -> Vec<T>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> T + Sync,
{
    (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = task_rng(seed, c as u64);
            let n = CHUNK.min(m - c * CHUNK);
            (0..n).map(|_| point(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// Uniform points on `[0, 1)`.
pub fn lebesgue_line(m: usize, seed: u64) -> Cloud {
    Cloud::Line(generate(m, seed, |r| r.gen::<f64>()))
}

/// Uniform points on `[0, 1)²`.
pub fn lebesgue_square(m: usize, seed: u64) -> Cloud {
    Cloud::Plane(generate(m, seed, |r| [r.gen::<f64>(), r.gen::<f64>()]))
}

/// Middle-third Cantor measure: 40 independent ternary digits in `{0, 2}`.
pub fn cantor_line(m: usize, seed: u64) -> Cloud {
    Cloud::Line(generate(m, seed, |r| {
        let mut x = 0.0;
        for _ in 0..40 {
            x = (x + if r.gen::<bool>() { 2.0 } else { 0.0 }) / 3.0;
        }
        x
    }))
}

/// Points of independent Lebesgue-started Gauss orbits after `burn_in`
/// steps; orbits that hit 0 restart.
pub fn gauss_orbit_cloud(m: usize, burn_in: usize, seed: u64) -> Cloud {
    Cloud::Line(generate(m, seed, |r| loop {
        let mut x = r.gen::<f64>();
        let mut ok = true;
        for _ in 0..burn_in {
            match GaussMap.apply(x) {
                Ok(y) if y > 0.0 => x = y,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            break x;
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: usize = 200_000;

    #[test]
    fn lebesgue_line_is_one() {
        let e = local_dimension(&lebesgue_line(M, 1), &LocalDimensionParams::default(), 2).unwrap();
        assert!((e.mean - 1.0).abs() < 0.02, "{}", e.mean);
        assert!(e.scaling_stable());
    }

    #[test]
    fn lebesgue_square_is_two() {
        let p = LocalDimensionParams { j_min: 5, j_max: 9, ..Default::default() };
        let e = local_dimension(&lebesgue_square(10 * M, 3), &p, 4).unwrap();
        assert!((e.mean - 2.0).abs() < 0.05, "{}", e.mean);
    }

    #[test]
    fn cantor_is_log2_over_log3() {
        let e = local_dimension(&cantor_line(M, 5), &LocalDimensionParams::default(), 6).unwrap();
        let d = 2f64.ln() / 3f64.ln();
        assert!((e.mean - d).abs() < 0.02, "{}", e.mean);
    }

    #[test]
    fn atomic_cloud_has_zero_dimension() {
        let e = local_dimension(&Cloud::Line(vec![0.25; 1000]), &LocalDimensionParams::default(), 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn sparse_cloud_is_rejected() {
        let c = lebesgue_line(40, 1);
        assert_eq!(local_dimension(&c, &LocalDimensionParams::default(), 1).unwrap_err(), Error::InsufficientCounts);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = cantor_line(10_000, 9);
        let b = cantor_line(10_000, 9);
        assert_eq!(a.to_csv(), b.to_csv());
    }
}
