//! Surrogate derivatives for the spike threshold.
//!
//! The forward pass fires with a hard step; the backward pass replaces
//! `d(step)/dv` with a compact bump `z(v)` centred on the threshold. All
//! three shapes are trapezoids in disguise:
//!
//! | kind        | plateau half-width | support half-width | height          |
//! |-------------|--------------------|--------------------|-----------------|
//! | rectangular | `w`                | `w`                | `1 / (2w)`      |
//! | triangular  | `0`                | `w`                | `1 / w`         |
//! | trapezoidal | `w1`               | `w2`               | `1 / (w1 + w2)` |
//!
//! Heights follow from requiring unit area, so they are not free parameters.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Narrowest support accepted for any surrogate.
pub const MIN_HALF_WIDTH: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurrogateKind {
    Rectangular,
    Triangular,
    Trapezoidal,
}

impl SurrogateKind {
    pub const ALL: [SurrogateKind; 3] = [
        SurrogateKind::Rectangular,
        SurrogateKind::Triangular,
        SurrogateKind::Trapezoidal,
    ];

    /// Short tag used on the command line and in CSV files.
    pub fn tag(self) -> &'static str {
        match self {
            SurrogateKind::Rectangular => "rect",
            SurrogateKind::Triangular => "tri",
            SurrogateKind::Trapezoidal => "trap",
        }
    }
}

impl fmt::Display for SurrogateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SurrogateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rect" | "rectangular" => Ok(SurrogateKind::Rectangular),
            "tri" | "triangular" => Ok(SurrogateKind::Triangular),
            "trap" | "trapezoidal" => Ok(SurrogateKind::Trapezoidal),
            other => Err(Error::validation(
                "surrogate",
                format!("unknown kind `{other}` (expected rect, tri or trap)"),
            )),
        }
    }
}

/// A validated surrogate shape. Construct through the kind-specific
/// constructors; the fields are read-only afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurrogateSpec {
    kind: SurrogateKind,
    w1: f64,
    w2: f64,
    vth: f64,
    h: f64,
}

impl SurrogateSpec {
    pub fn rectangular(width: f64, vth: f64) -> Result<Self> {
        check_width("width", width)?;
        check_vth(vth)?;
        Ok(SurrogateSpec {
            kind: SurrogateKind::Rectangular,
            w1: width,
            w2: width,
            vth,
            h: 1.0 / (2.0 * width),
        })
    }

    pub fn triangular(width: f64, vth: f64) -> Result<Self> {
        check_width("width", width)?;
        check_vth(vth)?;
        Ok(SurrogateSpec {
            kind: SurrogateKind::Triangular,
            w1: 0.0,
            w2: width,
            vth,
            h: 1.0 / width,
        })
    }

    pub fn trapezoidal(w1: f64, w2: f64, vth: f64) -> Result<Self> {
        check_width("w2", w2)?;
        check_vth(vth)?;
        if !(w1 >= 0.0 && w1 <= w2) {
            return Err(Error::validation(
                "w1",
                format!("need 0 <= w1 <= w2, got w1={w1}, w2={w2}"),
            ));
        }
        Ok(SurrogateSpec {
            kind: SurrogateKind::Trapezoidal,
            w1,
            w2,
            vth,
            h: 1.0 / (w1 + w2),
        })
    }

    pub fn kind(&self) -> SurrogateKind {
        self.kind
    }

    /// Plateau half-width.
    pub fn w1(&self) -> f64 {
        self.w1
    }

    /// Support half-width.
    pub fn w2(&self) -> f64 {
        self.w2
    }

    pub fn vth(&self) -> f64 {
        self.vth
    }

    pub fn height(&self) -> f64 {
        self.h
    }

    /// The points where `z` changes formula.
    pub fn breakpoints(&self) -> [f64; 4] {
        [
            self.vth - self.w2,
            self.vth - self.w1,
            self.vth + self.w1,
            self.vth + self.w2,
        ]
    }

    /// Surrogate derivative `z(v)`. Non-finite input is a contract violation.
    pub fn grad(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::contract(format!("surrogate_grad at non-finite v={v}")));
        }
        Ok(self.grad_unchecked(v))
    }

    /// `z(v)` without the finiteness check, for inner loops.
    #[inline]
    pub fn grad_unchecked(&self, v: f64) -> f64 {
        let d = (v - self.vth).abs();
        let ramp = self.h * (1.0 - (d - self.w1) / (self.w2 - self.w1));
        let outer = if d < self.w2 { ramp } else { 0.0 };
        if d < self.w1 {
            self.h
        } else {
            outer
        }
    }

    /// Antiderivative `S(v)` of `z`, normalised so `S(-inf) = 0`.
    pub fn smoothed_step(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::contract(format!("smoothed_step at non-finite v={v}")));
        }
        Ok(self.smoothed_step_unchecked(v))
    }

    #[inline]
    pub fn smoothed_step_unchecked(&self, v: f64) -> f64 {
        let d = v - self.vth;
        let x = d.abs();
        // Area of z over [vth, vth + x].
        let half = if x < self.w1 {
            self.h * x
        } else if x < self.w2 {
            let r = x - self.w1;
            self.h * (self.w1 + r - r * r / (2.0 * (self.w2 - self.w1)))
        } else {
            0.5
        };
        if d >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }
}

fn check_width(field: &str, w: f64) -> Result<()> {
    if !(w.is_finite() && w >= MIN_HALF_WIDTH) {
        return Err(Error::validation(
            field,
            format!("half-width must be finite and >= {MIN_HALF_WIDTH}, got {w}"),
        ));
    }
    Ok(())
}

fn check_vth(vth: f64) -> Result<()> {
    if !vth.is_finite() {
        return Err(Error::validation("vth", format!("must be finite, got {vth}")));
    }
    Ok(())
}

/// Free-function form of [`SurrogateSpec::grad`].
pub fn surrogate_grad(spec: &SurrogateSpec, v: f64) -> Result<f64> {
    spec.grad(v)
}

/// Free-function form of [`SurrogateSpec::smoothed_step`].
pub fn smoothed_step(spec: &SurrogateSpec, v: f64) -> Result<f64> {
    spec.smoothed_step(v)
}
