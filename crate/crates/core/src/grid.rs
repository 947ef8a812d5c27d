//! Periodic uniform grids on [−L, L)^d and functions sampled on them.

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Header magic of the binary grid-function format ("SLGF" as an integer).
pub const GRID_MAGIC: f64 = 1_397_507_910.0;
pub const GRID_FORMAT_VERSION: f64 = 1.0;

/// Uniform periodic grid with `n` points per axis on [−L, L)^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    half_period: f64,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, half_period: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::config(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !(half_period > 0.0 && half_period.is_finite()) {
            return Err(Error::config(format!("half period must be > 0, got {half_period}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::config(format!("points per axis must be a power of two, got {n}")));
        }
        Ok(Self { dim, half_period, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    pub fn half_period(&self) -> f64 {
        self.half_period
    }
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }
    /// Total number of points N^d.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }
    /// h = 2L/N.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period / self.n as f64
    }
    /// π/L.
    #[inline]
    pub fn fundamental(&self) -> f64 {
        PI / self.half_period
    }
    /// N/2 · π/L.
    #[inline]
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / 2.0 * self.fundamental()
    }
    /// Largest |ξ| on the frequency grid.
    pub fn max_frequency(&self) -> f64 {
        self.nyquist() * (self.dim as f64).sqrt()
    }

    /// Axis indices of a flat index (x fastest).
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.n, idx / self.n]
        }
    }

    #[inline]
    pub fn flatten(&self, ix: [usize; 2]) -> usize {
        if self.dim == 1 {
            ix[0]
        } else {
            ix[1] * self.n + ix[0]
        }
    }

    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_period + i as f64 * self.spacing()
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Vec2 {
        let ix = self.unflatten(idx);
        if self.dim == 1 {
            [self.coordinate(ix[0]), 0.0]
        } else {
            [self.coordinate(ix[0]), self.coordinate(ix[1])]
        }
    }

    /// Signed integer wavenumber of FFT bin `k` (Nyquist bin reported as +N/2).
    #[inline]
    pub fn wavenumber(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Angular frequency of FFT bin `idx`.
    #[inline]
    pub fn frequency(&self, idx: usize) -> Vec2 {
        let ix = self.unflatten(idx);
        let w = self.fundamental();
        if self.dim == 1 {
            [w * self.wavenumber(ix[0]) as f64, 0.0]
        } else {
            [w * self.wavenumber(ix[0]) as f64, w * self.wavenumber(ix[1]) as f64]
        }
    }

    /// Whether bin `idx` touches the Nyquist line along `axis`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        self.unflatten(idx)[axis] == self.n / 2
    }

    /// Wrap a coordinate into [−L, L).
    #[inline]
    pub fn wrap(&self, x: f64) -> f64 {
        let p = 2.0 * self.half_period;
        let y = (x + self.half_period).rem_euclid(p) - self.half_period;
        if y >= self.half_period {
            -self.half_period
        } else {
            y
        }
    }

    pub fn ensure_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!("grid mismatch: {self:?} vs {other:?}")))
        }
    }
}

/// Real function sampled on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    values: Vec<f64>,
    pub time: Option<f64>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values, time: None })
    }

    /// Internal constructor for values known to be finite.
    pub(crate) fn from_vec(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, time: None }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::from_vec(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self::from_vec(grid, vec![c; grid.len()])
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(Vec2) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::from_vec(grid, values)
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::Input(format!("non-finite value at index {i}"))),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.grid, self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_vec(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// sup |self − other|.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    /// Rows `x,value` or `x,y,value`, with shortest round-trip float formatting.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        if self.grid.dim == 1 {
            writeln!(w, "x,value")?;
        } else {
            writeln!(w, "x,y,value")?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.point(i);
            if self.grid.dim == 1 {
                writeln!(w, "{:?},{:?}", p[0], v)?;
            } else {
                writeln!(w, "{:?},{:?},{:?}", p[0], p[1], v)?;
            }
        }
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty csv".into()))??;
        let dim = match header.trim() {
            "x,value" => 1,
            "x,y,value" => 2,
            other => return Err(Error::Format(format!("unexpected csv header `{other}`"))),
        };
        let mut first = None;
        let mut values = Vec::new();
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("csv line {}: {e}", ln + 2)))?;
            if cols.len() != dim + 1 {
                return Err(Error::Format(format!("csv line {}: expected {} columns", ln + 2, dim + 1)));
            }
            if first.is_none() {
                first = Some(cols[0]);
            }
            values.push(cols[dim]);
        }
        let n = if dim == 1 { values.len() } else { (values.len() as f64).sqrt().round() as usize };
        let x0 = first.ok_or_else(|| Error::Format("csv has no rows".into()))?;
        let grid = TorusGrid::new(dim, -x0, n).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(grid, values)
    }

    /// Little-endian binary: header (magic, version, d, N, L, time or NaN, 0, 0) then values.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        let header = [
            GRID_MAGIC,
            GRID_FORMAT_VERSION,
            self.grid.dim as f64,
            self.grid.n as f64,
            self.grid.half_period,
            self.time.unwrap_or(f64::NAN),
            0.0,
            0.0,
        ];
        for v in header.iter().chain(&self.values) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let read_f64 = |r: &mut dyn Read| -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated grid file: {e}")))?;
            Ok(f64::from_le_bytes(b))
        };
        let mut header = [0.0; 8];
        for h in header.iter_mut() {
            *h = read_f64(r)?;
        }
        if header[0] != GRID_MAGIC {
            return Err(Error::Format("bad magic in grid file".into()));
        }
        if header[1] != GRID_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported grid format version {}", header[1])));
        }
        let grid = TorusGrid::new(header[2] as usize, header[4], header[3] as usize)
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            values.push(read_f64(r)?);
        }
        let mut f = Self::new(grid, values)?;
        if !header[5].is_nan() {
            f.time = Some(header[5]);
        }
        Ok(f)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        Self::read_binary(&mut r)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}
