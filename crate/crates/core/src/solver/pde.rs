use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{wavenumber_sq, Field, PeriodicGrid};

/// One periodic PDE family with its physical parameters.
///
/// Every variant is split as `du/dt = L u + N(u)` with a diagonal (in Fourier
/// space) stiff linear part `L`, see [`linear_symbol`], and a nonlinear
/// remainder evaluated pseudo-spectrally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Pde {
    /// `u_t + Δu + Δ²u + ½|∇u|² = 0`.
    KuramotoSivashinsky { dim: usize },
    /// Vorticity form `ω_t + u·∇ω = ν Δω + f` in 2D.
    NavierStokes {
        nu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        forcing: Option<Field>,
    },
    /// Two-species reaction-diffusion with feed `F` and kill rate `k`.
    GrayScott {
        dim: usize,
        feed: f64,
        kill: f64,
        du: f64,
        dv: f64,
    },
}

impl Pde {
    pub fn kuramoto_sivashinsky(dim: usize) -> Self {
        Pde::KuramotoSivashinsky { dim }
    }

    pub fn navier_stokes(nu: f64) -> Self {
        Pde::NavierStokes { nu, forcing: None }
    }

    pub fn gray_scott(feed: f64, kill: f64, du: f64, dv: f64) -> Self {
        Pde::GrayScott {
            dim: 2,
            feed,
            kill,
            du,
            dv,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Pde::KuramotoSivashinsky { dim } | Pde::GrayScott { dim, .. } => *dim,
            Pde::NavierStokes { .. } => 2,
        }
    }

    pub fn channels(&self) -> usize {
        match self {
            Pde::GrayScott { .. } => 2,
            _ => 1,
        }
    }

    /// Short identifier such as `ks2d`, `ns2d` or `gs2d`.
    pub fn id(&self) -> String {
        let tag = match self {
            Pde::KuramotoSivashinsky { .. } => "ks",
            Pde::NavierStokes { .. } => "ns",
            Pde::GrayScott { .. } => "gs",
        };
        format!("{tag}{}d", self.dim())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim()) {
            return Err(Error::arg(format!("dimension {} not in 1..=3", self.dim())));
        }
        match self {
            Pde::KuramotoSivashinsky { .. } => Ok(()),
            Pde::NavierStokes { nu, forcing } => {
                if !(nu.is_finite() && *nu > 0.0) {
                    return Err(Error::arg(format!("viscosity {nu} must be > 0")));
                }
                if let Some(f) = forcing {
                    if f.grid().dim() != 2 || f.channels() != 1 {
                        return Err(Error::arg("forcing must be a 2D scalar field"));
                    }
                }
                Ok(())
            }
            Pde::GrayScott {
                feed, kill, du, dv, ..
            } => {
                if ![feed, kill, du, dv].iter().all(|v| v.is_finite()) {
                    return Err(Error::arg("Gray-Scott parameters must be finite"));
                }
                if *du <= 0.0 || *dv <= 0.0 {
                    return Err(Error::arg("diffusivities must be > 0"));
                }
                Ok(())
            }
        }
    }

    pub(crate) fn check_grid(&self, grid: &PeriodicGrid) -> Result<()> {
        if grid.dim() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} is {}D but the grid is {}D",
                self.id(),
                self.dim(),
                grid.dim()
            )));
        }
        Ok(())
    }
}

/// Diagonal linear operator of `pde` on `grid`, one real array per channel
/// in half-spectrum layout.
///
/// K-S: `|k|² - |k|⁴`; N-S: `-ν|k|²`; G-S: `-D_u|k|² - F` and
/// `-D_v|k|² - (F + k)`, the linear reaction parts folded into the stiff
/// operator.
pub fn linear_symbol(pde: &Pde, grid: &PeriodicGrid) -> Result<Vec<Vec<f64>>> {
    pde.validate()?;
    pde.check_grid(grid)?;
    let k2 = wavenumber_sq(grid);
    Ok(match pde {
        Pde::KuramotoSivashinsky { .. } => vec![k2.iter().map(|&q| q - q * q).collect()],
        Pde::NavierStokes { nu, .. } => vec![k2.iter().map(|&q| -nu * q).collect()],
        Pde::GrayScott {
            feed, kill, du, dv, ..
        } => vec![
            k2.iter().map(|&q| -du * q - feed).collect(),
            k2.iter().map(|&q| -dv * q - (feed + kill)).collect(),
        ],
    })
}
