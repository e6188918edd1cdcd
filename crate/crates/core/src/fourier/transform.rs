use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::group::EmbeddingGroup;
use crate::error::{Error, Result};
use crate::geometry::{Block, Point};

/// A real function on a rectangular block of `Z^k`, zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFunction {
    block: Block,
    values: Vec<f64>,
}

impl LatticeFunction {
    pub fn new(block: Block, values: Vec<f64>) -> Result<Self> {
        let n = block.cells()?;
        if values.len() != n {
            return Err(Error::param(
                "values",
                format!("expected {n} values, got {}", values.len()),
            ));
        }
        Ok(LatticeFunction { block, values })
    }

    pub fn zeros(block: Block) -> Result<Self> {
        let n = block.cells()?;
        Ok(LatticeFunction {
            block,
            values: vec![0.0; n],
        })
    }

    /// Unit mass at `p`.
    pub fn point_mass(p: &[i64]) -> Self {
        let block = Block::new(p.to_vec(), vec![1; p.len()]);
        LatticeFunction {
            block,
            values: vec![1.0],
        }
    }

    pub fn from_fn(block: Block, mut f: impl FnMut(&[i64]) -> f64) -> Result<Self> {
        let n = block.cells()?;
        let values = (0..n).map(|i| f(&block.point_at(i))).collect();
        Ok(LatticeFunction { block, values })
    }

    pub fn block(&self) -> &Block {
        &self.block
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value_at(&self, p: &[i64]) -> f64 {
        self.block.index_of(p).map_or(0.0, |i| self.values[i])
    }

    /// Nonzero entries with their points.
    pub fn support(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (self.block.point_at(i), v))
    }

    /// `sum_m |f(m)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Rejects blocks that would alias on the group: a block of extent `E_j`
/// needs `2 E_j - 1 <= T_j` so that differences of its points stay distinct.
pub fn check_no_wraparound(block: &Block, group: &EmbeddingGroup) -> Result<()> {
    if block.k() != group.k() {
        return Err(Error::param(
            "group",
            format!(
                "dimension {} does not match the function's {}",
                group.k(),
                block.k()
            ),
        ));
    }
    for (axis, (&e, &t)) in block.extent().iter().zip(group.lengths()).enumerate() {
        if 2 * e as u128 > t as u128 + 1 {
            return Err(Error::Wraparound { axis });
        }
    }
    Ok(())
}

/// Discrete Fourier transform values `f^(xi_1/T_1, ..., xi_k/T_k)` on the
/// embedding group, with `f^(alpha) = sum_m f(m) e(-m . alpha)`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    group: EmbeddingGroup,
    values: Vec<Complex64>,
}

#[derive(Serialize)]
struct SpectrumSidecar<'a> {
    #[serde(rename = "T")]
    lengths: &'a [usize],
    k: usize,
    #[serde(rename = "M")]
    m: u64,
    eta: Option<String>,
    layout: &'static str,
}

impl Spectrum {
    pub fn group(&self) -> &EmbeddingGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at frequency indices `xi` (reduced mod `T`).
    pub fn at(&self, xi: &[i64]) -> Complex64 {
        self.values[self.group.index_of(xi)]
    }

    /// `(1 / prod T_j) sum_xi |f^(xi)|^2`.
    pub fn parseval_sum(&self) -> f64 {
        let n = self.values.len() as f64;
        pairwise_sum(&self.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>()) / n
    }

    /// Inverse transform, evaluated on `block`.
    pub fn inverse_on(&self, block: &Block) -> Result<LatticeFunction> {
        let mut data = self.values.clone();
        NdFft::new(self.group.lengths()).inverse(&mut data);
        let n = data.len() as f64;
        LatticeFunction::from_fn(block.clone(), |p| data[self.group.index_of(p)].re / n)
    }

    /// Raw little-endian `(re, im)` pairs in row-major frequency order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> String {
        let sidecar = SpectrumSidecar {
            lengths: self.group.lengths(),
            k: self.group.k(),
            m: self.group.m(),
            eta: self.group.eta().map(crate::rational::display),
            layout: "row-major complex128 little-endian (re, im)",
        };
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes")
    }

    /// Writes `<stem>.bin` and `<stem>.json`.
    pub fn export(&self, stem: &Path) -> Result<()> {
        let bin = stem.with_extension("bin");
        let json = stem.with_extension("json");
        self.write_binary(std::io::BufWriter::new(std::fs::File::create(bin)?))?;
        std::fs::write(json, self.sidecar_json() + "\n")?;
        Ok(())
    }

    /// Histogram of `|f^|` over `bins` equal-width bins on `[0, max]`.
    pub fn magnitude_histogram(&self, bins: usize) -> Vec<HistogramBin> {
        let bins = bins.max(1);
        let mags: Vec<f64> = self.values.iter().map(|v| v.norm()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let width = if max > 0.0 { max / bins as f64 } else { 1.0 };
        let mut counts = vec![0u64; bins];
        for m in mags {
            let b = ((m / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                lower: i as f64 * width,
                upper: (i + 1) as f64 * width,
                count,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

/// Separable multidimensional FFT over a row-major array.
pub struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    backward: Vec<Arc<dyn Fft<f64>>>,
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        NdFft {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            backward: shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    /// Unnormalized forward transform, `sum_m x_m e(-m . xi / T)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.axis_pass(data, axis, &self.forward[axis]);
        }
    }

    /// Unnormalized inverse transform (no `1 / prod T` factor).
    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.axis_pass(data, axis, &self.backward[axis]);
        }
    }

    fn axis_pass(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.shape[axis];
        if n == 1 {
            return;
        }
        let inner: usize = self.shape[axis + 1..].iter().product();
        let outer: usize = self.shape[..axis].iter().product();
        let batch = lanes_per_task(n);
        if inner == 1 {
            data.par_chunks_mut(n * batch).for_each(|c| fft.process(c));
            return;
        }
        // Gather lanes contiguously, transform, scatter back.
        let mut lanes = vec![Complex64::new(0.0, 0.0); data.len()];
        lanes
            .par_chunks_mut(inner * n)
            .zip(data.par_chunks(inner * n))
            .for_each(|(dst, src)| {
                for t in 0..n {
                    for i in 0..inner {
                        dst[i * n + t] = src[t * inner + i];
                    }
                }
            });
        lanes.par_chunks_mut(n * batch).for_each(|c| fft.process(c));
        data.par_chunks_mut(inner * n)
            .zip(lanes.par_chunks(inner * n))
            .for_each(|(dst, src)| {
                for t in 0..n {
                    for i in 0..inner {
                        dst[t * inner + i] = src[i * n + t];
                    }
                }
            });
        debug_assert_eq!(outer * inner * n, data.len());
    }
}

fn lanes_per_task(n: usize) -> usize {
    (4096 / n).max(1)
}

/// Embeds `f` into the group as a dense complex array.
pub fn embed(f: &LatticeFunction, group: &EmbeddingGroup) -> Result<Vec<Complex64>> {
    check_no_wraparound(f.block(), group)?;
    let mut data = vec![Complex64::new(0.0, 0.0); group.size()?];
    for (i, &v) in f.values().iter().enumerate() {
        if v != 0.0 {
            data[group.index_of(&f.block().point_at(i))] = Complex64::new(v, 0.0);
        }
    }
    Ok(data)
}

/// Transform of `f` on `group` via the FFT.
pub fn dft(f: &LatticeFunction, group: &EmbeddingGroup) -> Result<Spectrum> {
    let mut data = embed(f, group)?;
    NdFft::new(group.lengths()).forward(&mut data);
    Ok(Spectrum {
        group: group.clone(),
        values: data,
    })
}

/// Transform of `f` by direct summation over its support. Quadratic cost;
/// an oracle for small groups.
pub fn dft_direct(f: &LatticeFunction, group: &EmbeddingGroup) -> Result<Spectrum> {
    check_no_wraparound(f.block(), group)?;
    let n = group.size()?;
    let support: Vec<(Point, f64)> = f.support().collect();
    let lengths = group.lengths().to_vec();
    let values = (0..n)
        .into_par_iter()
        .map(|idx| {
            let xi = group.frequency_indices(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, v) in &support {
                let mut phase = 0.0;
                for axis in 0..p.len() {
                    let t = lengths[axis] as i128;
                    let r = (p[axis] as i128 * xi[axis] as i128).rem_euclid(t);
                    phase += r as f64 / t as f64;
                }
                acc += Complex64::from_polar(*v, -std::f64::consts::TAU * phase);
            }
            acc
        })
        .collect();
    Ok(Spectrum {
        group: group.clone(),
        values,
    })
}

/// Autocorrelation `c(v) = sum_m f(m) f(m + v)` through the group, read
/// back at the shifts `shifts`.
pub fn autocorrelation_at(
    f: &LatticeFunction,
    group: &EmbeddingGroup,
    shifts: &[Point],
) -> Result<Vec<f64>> {
    let spectrum = dft(f, group)?;
    let mut power: Vec<Complex64> = spectrum
        .values
        .iter()
        .map(|v| Complex64::new(v.norm_sqr(), 0.0))
        .collect();
    NdFft::new(group.lengths()).inverse(&mut power);
    let n = power.len() as f64;
    Ok(shifts
        .iter()
        .map(|s| power[group.index_of(s)].re / n)
        .collect())
}

/// Pairwise summation (fixed reduction tree, so results do not depend on
/// thread count).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        let mut acc = NeumaierSum::default();
        for &x in xs {
            acc.add(x);
        }
        return acc.value();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Neumaier's compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_transforms_to_one() {
        let g = EmbeddingGroup::with_lengths(3, vec![8, 16]).unwrap();
        let s = dft(&LatticeFunction::point_mass(&[0, 0]), &g).unwrap();
        for v in s.values() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_direct_sum_on_odd_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let block = Block::new(vec![1, 1], vec![3, 5]);
        let f = LatticeFunction::from_fn(block, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let g = EmbeddingGroup::with_lengths(3, vec![7, 12]).unwrap();
        let a = dft(&f, &g).unwrap();
        let b = dft_direct(&f, &g).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn inverse_recovers_the_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let block = Block::new(vec![1, 1, 1], vec![2, 4, 8]);
        let f = LatticeFunction::from_fn(block.clone(), |_| rng.gen_range(-2.0..2.0)).unwrap();
        let g = EmbeddingGroup::with_lengths(2, vec![4, 8, 16]).unwrap();
        let back = dft(&f, &g).unwrap().inverse_on(&block).unwrap();
        for (x, y) in f.values().iter().zip(back.values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn oversized_support_is_a_wraparound_error() {
        let block = Block::new(vec![1, 1], vec![5, 5]);
        let f = LatticeFunction::zeros(block).unwrap();
        let g = EmbeddingGroup::with_lengths(5, vec![16, 8]).unwrap();
        assert!(matches!(dft(&f, &g), Err(Error::Wraparound { axis: 1 })));
    }

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn binary_export_is_little_endian_pairs() {
        let g = EmbeddingGroup::with_lengths(1, vec![2, 2]).unwrap();
        let s = dft(&LatticeFunction::point_mass(&[0, 0]), &g).unwrap();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 * 16);
        assert_eq!(f64::from_le_bytes(buf[..8].try_into().unwrap()), 1.0);
        let hist = s.magnitude_histogram(4);
        assert_eq!(hist.iter().map(|b| b.count).sum::<u64>(), 4);
    }
}
