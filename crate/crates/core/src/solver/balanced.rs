//! Well-balanced shallow water scheme: reconstruction of the free surface
//! `eta = h + z`, hydrostatic reconstruction of interface states, and a
//! Richardson-extrapolated trapezoid rule for the bottom source that is
//! exact on lakes at rest.

use crate::error::{invalid, Result};
use crate::grid::Grid1D;
use crate::models::{Model, ShallowWater, Topography};
use crate::par::{try_fill, Parallelism};
use crate::quadrature::richardson_finest;
use crate::reconstruction::{CwenoResult, Scratch};

use super::{cell_average_of, llf_flux, wb_trapezoid_remainder, Reconstructor, RunConfig, Semidiscretization, SourceQuadrature};

/// Largest node count of a Richardson rule (order 10).
const MAX_NODES: usize = 17;

/// `q / h` computed as `2 h q / (h^2 + max(h^2, eps^2))`; equals `q / h`
/// whenever `h >= eps` and stays bounded as `h -> 0`.
pub fn desingularized_velocity(h: f64, q: f64, eps: f64) -> f64 {
    let h2 = h * h;
    let den = h2 + h2.max(eps * eps);
    if den == 0.0 {
        0.0
    } else {
        2.0 * h * q / den
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Side {
    h: f64,
    eta: f64,
    q: f64,
    z: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct WbTrace {
    left: Side,
    right: Side,
    /// Source average without its lake-at-rest part, which is folded into
    /// the interface terms.
    source: f64,
}

/// Hydrostatic reconstruction scheme for the shallow water equations.
#[derive(Clone, Debug)]
pub struct WellBalancedSwe {
    model: ShallowWater,
    grid: Grid1D,
    recon: Reconstructor,
    zbar: Vec<f64>,
    /// `zbar` with ghost cells, aligned with the padded surface.
    zpad: Vec<f64>,
    /// Bottom at the Richardson nodes of every traced cell, `nodes` per cell.
    znodes: Vec<f64>,
    nodes: usize,
    q: usize,
    desing_eps: Option<f64>,
    char_proj: bool,
    parallelism: Parallelism,
}

impl WellBalancedSwe {
    pub fn new(model: ShallowWater, grid: Grid1D, cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let q = match cfg.quadrature {
            SourceQuadrature::Matched => cfg.cweno.order() + 1,
            SourceQuadrature::Richardson(q) => q,
            SourceQuadrature::Gauss(_) => {
                return invalid("the well-balanced source needs a Richardson quadrature")
            }
        };
        let nodes = richardson_finest(q)? + 1;
        let recon = Reconstructor::new(&grid, &cfg.cweno)?;
        let n = grid.len();
        let zbar = match model.bottom() {
            Topography::CellAverages(v) => {
                if v.len() != n {
                    return invalid(format!("{} bottom averages for {n} cells", v.len()));
                }
                v.clone()
            }
            bottom => (0..n)
                .map(|j| cell_average_of(&|x| [bottom.value(x).unwrap_or(0.0)], grid.cell(j))[0])
                .collect(),
        };

        let zpad = recon.pad(&zbar, |v| v);
        let traced = recon.traced_cells();
        let mut znodes = vec![0.0; traced * nodes];
        let node = |k: usize| k as f64 / (nodes - 1) as f64 - 0.5;
        match model.bottom() {
            Topography::CellAverages(_) => {
                let mut scratch = Scratch::default();
                for c in 0..traced {
                    let p = recon.reconstruct_scalar(&zpad, c, &mut scratch)?.prec;
                    let h = recon.cell_size(c);
                    for k in 0..nodes {
                        znodes[c * nodes + k] = p.eval(node(k) * h);
                    }
                }
            }
            bottom => {
                // ghost cells sit at their physical positions outside the domain
                for c in 0..traced {
                    let h = recon.cell_size(c);
                    let center = if c == 0 {
                        grid.a() - 0.5 * h
                    } else if c == n + 1 {
                        grid.b() + 0.5 * h
                    } else {
                        grid.centers()[c - 1]
                    };
                    for k in 0..nodes {
                        znodes[c * nodes + k] = bottom.value(center + node(k) * h).unwrap_or(0.0);
                    }
                }
            }
        }
        Ok(Self {
            model,
            grid,
            recon,
            zbar,
            zpad,
            znodes,
            nodes,
            q,
            desing_eps: cfg.desing_eps,
            char_proj: cfg.char_proj,
            parallelism: cfg.parallelism,
        })
    }

    pub fn model(&self) -> &ShallowWater {
        &self.model
    }

    /// Cell averages of the bottom.
    pub fn bottom_averages(&self) -> &[f64] {
        &self.zbar
    }

    /// Reconstruction of `(eta, q)`. The projection uses the eigenvectors of
    /// the centre state `(eta - zbar, q)`, which also diagonalise the
    /// `(eta, q)` system for a fixed bottom; dry centres fall back to
    /// componentwise reconstruction.
    fn reconstruct(&self, padded: &[[f64; 2]], c: usize, scratch: &mut Scratch) -> Result<[CwenoResult; 2]> {
        let mid = c + self.recon.config().g;
        let h = padded[mid][0] - self.zpad[mid];
        let eig = if self.char_proj && h > 0.0 { Some(self.model.eigen(&[h, padded[mid][1]])?) } else { None };
        self.recon.reconstruct_projected(eig.as_ref(), padded, c, scratch)
    }

    fn eps(&self, c: usize) -> f64 {
        self.desing_eps.unwrap_or_else(|| self.recon.cell_size(c))
    }

    /// Momentum-balanced fluxes leaving the left cell and entering the right
    /// cell at one interface. The hydrostatic pressure `g/2 h^2` of each
    /// trace is left out; it cancels against the matching part of the cell
    /// source, so a lake at rest gives zero up to differences of `eta`.
    fn interface(&self, l: Side, r: Side, eps_l: f64, eps_r: f64) -> ([f64; 2], [f64; 2]) {
        let g = self.model.gravity();
        let (hl, hr) = (l.h.max(0.0), r.h.max(0.0));
        let (etal, etar) = (if l.h > 0.0 { l.eta } else { l.z }, if r.h > 0.0 { r.eta } else { r.z });
        let zs = l.z.max(r.z);
        let hsl = (etal - zs).max(0.0);
        let hsr = (etar - zs).max(0.0);
        let ul = desingularized_velocity(hl, l.q, eps_l);
        let ur = desingularized_velocity(hr, r.q, eps_r);
        let f = llf_flux(&self.model, &[hsl, hsl * ul], &[hsr, hsr * ur]);
        // a negative trace depth keeps its pressure `g/2 h^2` in the cell
        // source, so it is not clipped here either
        let fl = [f[0], f[1] - 0.5 * g * hsl * hsl];
        let fr = [f[0], f[1] - 0.5 * g * hsr * hsr];
        (fl, fr)
    }
}

impl Semidiscretization<2> for WellBalancedSwe {
    fn grid(&self) -> &Grid1D {
        &self.grid
    }

    fn order(&self) -> usize {
        self.recon.config().order()
    }

    fn rhs(&self, u: &[[f64; 2]], _t: f64, out: &mut [[f64; 2]]) -> Result<()> {
        let n = self.grid.len();
        let g = self.model.gravity();
        let surface: Vec<[f64; 2]> = u.iter().zip(&self.zbar).map(|(s, z)| [s[0] + z, s[1]]).collect();
        let padded = self.recon.pad(&surface, |s| self.model.mirror(s));
        let nodes = self.nodes;
        let mut traces = vec![WbTrace::default(); n + 2];
        try_fill(&mut traces, self.parallelism, Scratch::default, |scratch, c, tr| {
            let [eta, q] = self.reconstruct(&padded, c, scratch)?;
            let h = self.recon.cell_size(c);
            let zn = &self.znodes[c * nodes..(c + 1) * nodes];
            let (mut hs, mut etas) = ([0.0; MAX_NODES], [0.0; MAX_NODES]);
            for k in 0..nodes {
                let xi = k as f64 / (nodes - 1) as f64 - 0.5;
                etas[k] = eta.prec.eval(xi * h);
                hs[k] = etas[k] - zn[k];
            }
            let last = nodes - 1;
            tr.left = Side { h: hs[0], eta: etas[0], q: q.prec.eval(-0.5 * h), z: zn[0] };
            tr.right = Side { h: hs[last], eta: etas[last], q: q.prec.eval(0.5 * h), z: zn[last] };
            if (1..=n).contains(&c) {
                tr.source = wb_trapezoid_remainder(self.q, &hs[..nodes], &etas[..nodes], g)? / h;
            }
            Ok(())
        })?;
        let faces: Vec<([f64; 2], [f64; 2])> = (0..=n)
            .map(|i| self.interface(traces[i].right, traces[i + 1].left, self.eps(i), self.eps(i + 1)))
            .collect();
        for (j, o) in out.iter_mut().enumerate() {
            let h = self.grid.sizes()[j];
            let (right, left) = (faces[j + 1].0, faces[j].1);
            o[0] = -(right[0] - left[0]) / h;
            o[1] = -(right[1] - left[1]) / h + traces[j + 1].source;
        }
        Ok(())
    }

    fn max_wave_speed(&self, u: &[[f64; 2]]) -> f64 {
        u.iter().map(|s| self.model.max_wave_speed(s)).fold(0.0, f64::max)
    }
}
