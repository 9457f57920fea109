//! Cell-centered finite-volume fields on a Cartesian box with mirror
//! ghost cells, plus every discrete operator and norm/functional the
//! stepper and monitors consume.
//!
//! The homogeneous Neumann condition is realized by one layer of ghost
//! cells per face that mirror the adjacent interior cell. With that
//! choice the discrete Laplacian and the chemotactic flux divergence
//! conserve mass exactly (no flux crosses a boundary face) and the
//! discrete integration-by-parts identity holds to round-off — the
//! structural facts the a-priori estimates lean on at the continuous
//! level.

use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{DomainSpec, InitialData, InitialKind};

/// Flux discretization for the chemotactic term: central (second-order
/// arithmetic face mean) or donor-cell upwinding (positivity-robust).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxScheme {
    Central,
    Upwind,
}

/// Cartesian discretization of the box domain. Unused axes have one
/// cell and no ghost layer, so the same storage serves 1D, 2D, and 3D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dims: usize,
    /// Interior cell counts per axis (1 on unused axes).
    pub cells: [usize; 3],
    /// Axis extents (1.0 on unused axes).
    pub lengths: [f64; 3],
    /// Cell spacing per axis.
    pub h: [f64; 3],
    /// Storage extents including ghosts.
    ext: [usize; 3],
    pub cell_volume: f64,
}

impl Grid {
    pub fn new(dims: usize, cells: &[usize], lengths: &[f64]) -> Self {
        assert!((1..=3).contains(&dims));
        assert_eq!(cells.len(), dims);
        assert_eq!(lengths.len(), dims);
        let mut c = [1usize; 3];
        let mut l = [1.0f64; 3];
        let mut h = [1.0f64; 3];
        let mut ext = [1usize; 3];
        let mut vol = 1.0;
        for d in 0..dims {
            assert!(cells[d] >= 2 && lengths[d] > 0.0);
            c[d] = cells[d];
            l[d] = lengths[d];
            h[d] = lengths[d] / cells[d] as f64;
            ext[d] = cells[d] + 2;
            vol *= h[d];
        }
        Self {
            dims,
            cells: c,
            lengths: l,
            h,
            ext,
            cell_volume: vol,
        }
    }

    pub fn from_domain(domain: &DomainSpec) -> Self {
        Self::new(domain.dims, &domain.cells, &domain.lengths)
    }

    pub fn n_cells(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    fn storage_len(&self) -> usize {
        self.ext[0] * self.ext[1] * self.ext[2]
    }

    /// Offset of the first interior cell along an axis (0 on unused axes).
    fn start(&self, axis: usize) -> usize {
        usize::from(axis < self.dims)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ext[1] + j) * self.ext[2] + k
    }

    #[inline]
    fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.ext[1] * self.ext[2],
            1 => self.ext[2],
            _ => 1,
        }
    }

    /// Physical coordinates of the interior cell center `c` (0-based
    /// per-axis interior indices).
    pub fn cell_center(&self, c: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for d in 0..self.dims {
            x[d] = (c[d] as f64 + 0.5) * self.h[d];
        }
        x
    }

    pub fn min_spacing(&self) -> f64 {
        self.h[..self.dims]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// One scalar field: cell-averaged values plus a one-cell ghost layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            data: vec![0.0; grid.storage_len()],
            grid,
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            data: vec![value; grid.storage_len()],
            grid,
        }
    }

    /// Build from a function of the cell-center coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        out.for_each_interior_mut(|x, v| *v = f(x));
        out.fill_ghosts();
        out
    }

    #[inline]
    pub fn at(&self, interior: [usize; 3]) -> f64 {
        let g = &self.grid;
        self.data[g.idx(
            interior[0] + g.start(0),
            interior[1] + g.start(1),
            interior[2] + g.start(2),
        )]
    }

    #[inline]
    pub fn set(&mut self, interior: [usize; 3], value: f64) {
        let g = self.grid;
        let idx = g.idx(
            interior[0] + g.start(0),
            interior[1] + g.start(1),
            interior[2] + g.start(2),
        );
        self.data[idx] = value;
    }

    fn for_each_interior_mut(&mut self, mut f: impl FnMut([f64; 3], &mut f64)) {
        let g = self.grid;
        for i in 0..g.cells[0] {
            for j in 0..g.cells[1] {
                for k in 0..g.cells[2] {
                    let x = g.cell_center([i, j, k]);
                    let idx = g.idx(i + g.start(0), j + g.start(1), k + g.start(2));
                    f(x, &mut self.data[idx]);
                }
            }
        }
    }

    /// Apply `out = f(a_cell)` cellwise into a fresh field (ghosts left
    /// zero; call `fill_ghosts` if needed downstream).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        let mut out = Field::zeros(self.grid);
        let g = self.grid;
        for i in g.start(0)..g.start(0) + g.cells[0] {
            for j in g.start(1)..g.start(1) + g.cells[1] {
                for k in g.start(2)..g.start(2) + g.cells[2] {
                    let idx = g.idx(i, j, k);
                    out.data[idx] = f(self.data[idx]);
                }
            }
        }
        out
    }

    /// Mirror every ghost cell from its adjacent interior cell
    /// (homogeneous Neumann / even reflection). Interior untouched.
    pub fn fill_ghosts(&mut self) {
        let g = self.grid;
        for axis in 0..g.dims {
            let n = g.cells[axis];
            let stride = g.stride(axis);
            // iterate the full extents of the other two axes so edge and
            // corner ghosts become consistent after all passes
            let (a1, a2) = other_axes(axis);
            for p in 0..g.ext[a1] {
                for q in 0..g.ext[a2] {
                    let mut base = [0usize; 3];
                    base[a1] = p;
                    base[a2] = q;
                    let line = g.idx(base[0], base[1], base[2]);
                    self.data[line] = self.data[line + stride];
                    self.data[line + (n + 1) * stride] = self.data[line + n * stride];
                }
            }
        }
    }

    /// Standard 3/5/7-point Laplacian; exact zero on constants.
    /// Requires ghosts filled.
    pub fn laplacian(&self) -> Field {
        let g = self.grid;
        let mut out = Field::zeros(g);
        let inv_h2: Vec<f64> = (0..g.dims).map(|d| 1.0 / (g.h[d] * g.h[d])).collect();
        for i in g.start(0)..g.start(0) + g.cells[0] {
            for j in g.start(1)..g.start(1) + g.cells[1] {
                for k in g.start(2)..g.start(2) + g.cells[2] {
                    let idx = g.idx(i, j, k);
                    let center = self.data[idx];
                    let mut acc = 0.0;
                    for d in 0..g.dims {
                        let s = g.stride(d);
                        acc += (self.data[idx - s] - 2.0 * center + self.data[idx + s])
                            * inv_h2[d];
                    }
                    out.data[idx] = acc;
                }
            }
        }
        out
    }

    /// Signed integral Σ f · vol over interior cells.
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each_interior(|_, v| acc += v);
        acc * self.grid.cell_volume
    }

    /// Volume-weighted Lᵖ norm; `f64::INFINITY` gives max |f|.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0 || p.is_infinite());
        if p.is_infinite() {
            return self.max_abs();
        }
        let mut acc = 0.0;
        if p == 1.0 {
            self.for_each_interior(|_, v| acc += v.abs());
        } else if p == 2.0 {
            self.for_each_interior(|_, v| acc += v * v);
        } else {
            self.for_each_interior(|_, v| acc += v.abs().powf(p));
        }
        (acc * self.grid.cell_volume).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.for_each_interior(|_, v| m = m.max(v.abs()));
        m
    }

    pub fn min_value(&self) -> f64 {
        let mut m = f64::INFINITY;
        self.for_each_interior(|_, v| m = m.min(v));
        m
    }

    pub fn max_value(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        self.for_each_interior(|_, v| m = m.max(v));
        m
    }

    pub fn is_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_interior(|_, v| ok &= v.is_finite());
        ok
    }

    fn for_each_interior(&self, mut f: impl FnMut(usize, f64)) {
        let g = self.grid;
        for i in g.start(0)..g.start(0) + g.cells[0] {
            for j in g.start(1)..g.start(1) + g.cells[1] {
                for k in g.start(2)..g.start(2) + g.cells[2] {
                    let idx = g.idx(i, j, k);
                    f(idx, self.data[idx]);
                }
            }
        }
    }

    /// ∫|∇f|² by face-difference quadrature. Each interior face owns
    /// the dual volume between the adjacent cell centers; the half-cell
    /// strips at the boundary (where the mirror difference is zero by
    /// construction) are assigned the nearest face gradient, which
    /// makes the quadrature exact for linear fields. Requires ghosts
    /// filled.
    pub fn grad_sq_integral(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each_face(|g2, _, _, share| acc += g2 * share);
        acc
    }

    /// (∫ f ln f, ∫ |∇f|²/f) with the conventions 0·ln 0 = 0 and faces
    /// whose harmonic-mean density falls below 1e-14 contributing 0 to
    /// the Fisher term. Requires f ≥ 0 (scheme-tolerance negatives are
    /// treated as vacuum) and ghosts filled.
    pub fn entropy_and_fisher(&self) -> (f64, f64) {
        let mut entropy = 0.0;
        self.for_each_interior(|_, v| {
            if v > 0.0 {
                entropy += v * v.ln();
            }
        });
        entropy *= self.grid.cell_volume;

        let mut fisher = 0.0;
        self.for_each_face(|g2, left, right, share| {
            let (l, r) = (left.max(0.0), right.max(0.0));
            let sum = l + r;
            if sum > 0.0 {
                let harmonic = 2.0 * l * r / sum;
                if harmonic >= 1e-14 {
                    fisher += g2 / harmonic * share;
                }
            }
        });
        (entropy, fisher)
    }

    /// Visit every interior face with its squared gradient, adjacent
    /// values, and boundary-augmented volume share.
    fn for_each_face(&self, mut f: impl FnMut(f64, f64, f64, f64)) {
        let g = self.grid;
        let vol = g.cell_volume;
        for axis in 0..g.dims {
            let n = g.cells[axis];
            let stride = g.stride(axis);
            let inv_h = 1.0 / g.h[axis];
            let (a1, a2) = other_axes(axis);
            for p in g.start(a1)..g.start(a1) + g.cells[a1] {
                for q in g.start(a2)..g.start(a2) + g.cells[a2] {
                    let mut base = [0usize; 3];
                    base[a1] = p;
                    base[a2] = q;
                    for face in 1..n {
                        let mut c = base;
                        c[axis] = face;
                        let idx = g.idx(c[0], c[1], c[2]);
                        let left = self.data[idx];
                        let right = self.data[idx + stride];
                        let grad = (right - left) * inv_h;
                        let mut share = vol;
                        if face == 1 {
                            share += 0.5 * vol;
                        }
                        if face == n - 1 {
                            share += 0.5 * vol;
                        }
                        f(grad * grad, left, right, share);
                    }
                }
            }
        }
    }
}

fn other_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Flux regularization factor `F_ε(s) = (1 + εs)^{−(N+1)}`; equals 1
/// for ε = 0 and lies in (0, 1] for s ≥ 0.
#[inline]
pub fn f_eps(s: f64, eps: f64, dim_n: u32) -> f64 {
    if eps == 0.0 {
        return 1.0;
    }
    (1.0 + eps * s.max(0.0)).powi(-(dim_n as i32 + 1))
}

/// Discrete `−χ ∇·(ρ F_ε(ρ) ∇w)` in flux form.
///
/// The face gradient of `w` is a central difference; the face density
/// is the arithmetic mean (`Central`) or the donor-cell value selected
/// by the sign of the face velocity `χ F_ε ∂w/∂n` (`Upwind`); `F_ε` is
/// applied at the face density. Boundary faces carry no flux (mirror
/// ghosts), so the cell sum of the result vanishes to round-off.
/// Requires ghosts filled on both fields.
pub fn chemotactic_divergence(
    density: &Field,
    w: &Field,
    chi: f64,
    eps: f64,
    dim_n: u32,
    scheme: FluxScheme,
) -> Field {
    let g = density.grid;
    assert_eq!(g, w.grid, "density and signal must share one grid");
    let mut out = Field::zeros(g);
    for axis in 0..g.dims {
        let n = g.cells[axis];
        let stride = g.stride(axis);
        let inv_h = 1.0 / g.h[axis];
        let (a1, a2) = other_axes(axis);
        for p in g.start(a1)..g.start(a1) + g.cells[a1] {
            for q in g.start(a2)..g.start(a2) + g.cells[a2] {
                let mut base = [0usize; 3];
                base[a1] = p;
                base[a2] = q;
                for face in 1..n {
                    let mut c = base;
                    c[axis] = face;
                    let idx = g.idx(c[0], c[1], c[2]);
                    let grad_w = (w.data[idx + stride] - w.data[idx]) * inv_h;
                    let rho_face = match scheme {
                        FluxScheme::Central => {
                            0.5 * (density.data[idx] + density.data[idx + stride])
                        }
                        FluxScheme::Upwind => {
                            // χF > 0, so the velocity sign is the sign of ∂w/∂n
                            if grad_w > 0.0 {
                                density.data[idx]
                            } else {
                                density.data[idx + stride]
                            }
                        }
                    }
                    .max(0.0); // vacuum cells cannot emit mass
                    let flux = chi * rho_face * f_eps(rho_face, eps, dim_n) * grad_w;
                    out.data[idx] -= flux * inv_h;
                    out.data[idx + stride] += flux * inv_h;
                }
            }
        }
    }
    out
}

/// Bilinear face sum Σ_faces (Δa/h)(Δb/h)·vol with plain (unaugmented)
/// shares: the exact negative of Σ a·Δ_h b·vol under mirror ghosts.
pub fn face_product_integral(a: &Field, b: &Field) -> f64 {
    let g = a.grid;
    assert_eq!(g, b.grid);
    let vol = g.cell_volume;
    let mut acc = 0.0;
    for axis in 0..g.dims {
        let n = g.cells[axis];
        let stride = g.stride(axis);
        let inv_h = 1.0 / g.h[axis];
        let (a1, a2) = other_axes(axis);
        for p in g.start(a1)..g.start(a1) + g.cells[a1] {
            for q in g.start(a2)..g.start(a2) + g.cells[a2] {
                let mut base = [0usize; 3];
                base[a1] = p;
                base[a2] = q;
                for face in 1..n {
                    let mut c = base;
                    c[axis] = face;
                    let idx = g.idx(c[0], c[1], c[2]);
                    let da = (a.data[idx + stride] - a.data[idx]) * inv_h;
                    let db = (b.data[idx + stride] - b.data[idx]) * inv_h;
                    acc += da * db * vol;
                }
            }
        }
    }
    acc
}

/// Largest face-gradient magnitude of `w`; the advective speed scale
/// for the chemotactic CFL limit. Requires ghosts filled.
pub fn max_face_gradient(w: &Field) -> f64 {
    let g = w.grid;
    let mut m: f64 = 0.0;
    for axis in 0..g.dims {
        let n = g.cells[axis];
        let stride = g.stride(axis);
        let inv_h = 1.0 / g.h[axis];
        let (a1, a2) = other_axes(axis);
        for p in g.start(a1)..g.start(a1) + g.cells[a1] {
            for q in g.start(a2)..g.start(a2) + g.cells[a2] {
                let mut base = [0usize; 3];
                base[a1] = p;
                base[a2] = q;
                for face in 1..n {
                    let mut c = base;
                    c[axis] = face;
                    let idx = g.idx(c[0], c[1], c[2]);
                    m = m.max(((w.data[idx + stride] - w.data[idx]) * inv_h).abs());
                }
            }
        }
    }
    m
}

/// The solution triple and current time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: Field,
    pub v: Field,
    pub w: Field,
    pub t: f64,
}

impl FieldState {
    pub fn new(u: Field, v: Field, w: Field, t: f64) -> Self {
        assert_eq!(u.grid, v.grid);
        assert_eq!(u.grid, w.grid);
        Self { u, v, w, t }
    }

    pub fn grid(&self) -> Grid {
        self.u.grid
    }

    pub fn fill_ghosts(&mut self) {
        self.u.fill_ghosts();
        self.v.fill_ghosts();
        self.w.fill_ghosts();
    }

    pub fn min_value(&self) -> f64 {
        self.u
            .min_value()
            .min(self.v.min_value())
            .min(self.w.min_value())
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.w.is_finite()
    }
}

#[derive(Debug, Error)]
pub enum InitError {
    #[error("generated initial data violates {0}")]
    Invalid(String),
    #[error("snapshot read failed: {0}")]
    Snapshot(#[from] SnapshotError),
    #[error("snapshot grid ({got}) does not match configured grid ({want})")]
    GridMismatch { got: String, want: String },
}

/// Build the initial (u, v, w) on `grid` from the configured recipe.
/// The produced state has ghosts filled and t = 0.
pub fn initial_state(grid: Grid, init: &InitialData, seed: u64) -> Result<FieldState, InitError> {
    let fields: [Field; 3] = match init.kind {
        InitialKind::Constant => {
            [0, 1, 2].map(|f| Field::constant(grid, init.base[f]))
        }
        InitialKind::CosineBump => [0, 1, 2].map(|f| {
            let (base, amp, mode) = (init.base[f], init.amplitude[f], init.mode as f64);
            Field::from_fn(grid, |x| {
                let mut shape = 1.0;
                for d in 0..grid.dims {
                    shape *= (mode * std::f64::consts::PI * x[d] / grid.lengths[d]).cos();
                }
                base + amp * shape
            })
        }),
        InitialKind::GaussianBumps => {
            let center: Vec<f64> = init.center.clone().unwrap_or_else(|| {
                (0..grid.dims).map(|d| 0.5 * grid.lengths[d]).collect()
            });
            let min_len = grid.lengths[..grid.dims]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let sigma = init.width_frac * min_len;
            [0, 1, 2].map(|f| {
                let (base, amp) = (init.base[f], init.amplitude[f]);
                Field::from_fn(grid, |x| {
                    let mut d2 = 0.0;
                    for d in 0..grid.dims {
                        let dx = x[d] - center.get(d).copied().unwrap_or(0.5 * grid.lengths[d]);
                        d2 += dx * dx;
                    }
                    base + amp * (-d2 / (2.0 * sigma * sigma)).exp()
                })
            })
        }
        InitialKind::RandomPerturbation => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            [0, 1, 2].map(|f| {
                let (base, amp) = (init.base[f], init.amplitude[f]);
                let mut field = Field::zeros(grid);
                field.for_each_interior_mut(|_, v| {
                    let xi: f64 = rng.gen_range(-1.0..=1.0);
                    *v = base * (1.0 + amp * xi);
                });
                field.fill_ghosts();
                field
            })
        }
        InitialKind::FromSnapshot => {
            let path = init
                .snapshot
                .as_ref()
                .ok_or_else(|| InitError::Invalid("missing snapshot path".into()))?;
            let file = std::fs::File::open(path).map_err(SnapshotError::Io)?;
            let state = read_snapshot(io::BufReader::new(file))?;
            if state.grid().dims != grid.dims || state.grid().cells != grid.cells {
                return Err(InitError::GridMismatch {
                    got: format!("{:?}", &state.grid().cells[..state.grid().dims]),
                    want: format!("{:?}", &grid.cells[..grid.dims]),
                });
            }
            let mut state = FieldState::new(state.u, state.v, state.w, 0.0);
            state.u.grid = grid;
            state.v.grid = grid;
            state.w.grid = grid;
            state.fill_ghosts();
            [state.u, state.v, state.w]
        }
    };

    let [u, v, w] = fields;
    for (field, name) in [(&u, "u0 ≥ 0"), (&v, "v0 ≥ 0"), (&w, "w0 ≥ 0")] {
        if field.min_value() < 0.0 {
            return Err(InitError::Invalid(name.into()));
        }
    }
    if u.max_value() <= 0.0 {
        return Err(InitError::Invalid("u0 ≢ 0".into()));
    }
    let mut state = FieldState::new(u, v, w, 0.0);
    state.fill_ghosts();
    Ok(state)
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad snapshot header: {0}")]
    Header(String),
}

/// Write the state in the `AALAB1` snapshot format: one ASCII header
/// line `AALAB1 dims n1 [n2 [n3]] t`, then the raw little-endian f64
/// interior values of u, v, w in row-major order.
pub fn write_snapshot(mut out: impl Write, state: &FieldState) -> Result<(), SnapshotError> {
    let g = state.grid();
    let mut header = format!("AALAB1 {}", g.dims);
    for d in 0..g.dims {
        header.push_str(&format!(" {}", g.cells[d]));
    }
    header.push_str(&format!(" {}\n", state.t));
    out.write_all(header.as_bytes())?;
    for field in [&state.u, &state.v, &state.w] {
        for i in 0..g.cells[0] {
            for j in 0..g.cells[1] {
                for k in 0..g.cells[2] {
                    out.write_all(&field.at([i, j, k]).to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

/// Read a snapshot written by [`write_snapshot`]. Axis lengths are not
/// stored in the format; the returned grid uses unit extents and the
/// caller overlays the configured domain geometry.
pub fn read_snapshot(mut input: impl Read) -> Result<FieldState, SnapshotError> {
    let mut header = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        input.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            break;
        }
        header.push(byte[0]);
        if header.len() > 256 {
            return Err(SnapshotError::Header("unterminated header line".into()));
        }
    }
    let header = String::from_utf8(header)
        .map_err(|_| SnapshotError::Header("header is not valid UTF-8".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first() != Some(&"AALAB1") {
        return Err(SnapshotError::Header(format!(
            "expected magic AALAB1, got `{}`",
            tokens.first().unwrap_or(&"")
        )));
    }
    let dims: usize = tokens
        .get(1)
        .and_then(|t| t.parse().ok())
        .filter(|d| (1..=3).contains(d))
        .ok_or_else(|| SnapshotError::Header("bad dims".into()))?;
    if tokens.len() != dims + 3 {
        return Err(SnapshotError::Header(format!(
            "expected {} header tokens, got {}",
            dims + 3,
            tokens.len()
        )));
    }
    let mut cells = Vec::with_capacity(dims);
    for d in 0..dims {
        let n: usize = tokens[2 + d]
            .parse()
            .map_err(|_| SnapshotError::Header(format!("bad cell count `{}`", tokens[2 + d])))?;
        cells.push(n);
    }
    let t: f64 = tokens[dims + 2]
        .parse()
        .map_err(|_| SnapshotError::Header(format!("bad time `{}`", tokens[dims + 2])))?;

    let lengths = vec![1.0; dims];
    let grid = Grid::new(dims, &cells, &lengths);
    let mut fields = Vec::with_capacity(3);
    let mut buf = [0u8; 8];
    for _ in 0..3 {
        let mut field = Field::zeros(grid);
        for i in 0..grid.cells[0] {
            for j in 0..grid.cells[1] {
                for k in 0..grid.cells[2] {
                    input.read_exact(&mut buf)?;
                    field.set([i, j, k], f64::from_le_bytes(buf));
                }
            }
        }
        field.fill_ghosts();
        fields.push(field);
    }
    let w = fields.pop().unwrap();
    let v = fields.pop().unwrap();
    let u = fields.pop().unwrap();
    Ok(FieldState::new(u, v, w, t))
}
