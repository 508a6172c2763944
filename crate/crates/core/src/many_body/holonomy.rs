//! Charge-around-flux holonomy on the torus.

use num_complex::Complex64;
use serde::Serialize;

use super::model::Model;
use crate::error::{Error, Result};
use crate::group::{Char, Elem};
use crate::lattice::{DualStringPath, StringPath};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolonomyResult {
    pub measured: Complex64Ser,
    pub expected: Complex64Ser,
    pub winding: i64,
    pub error: f64,
}

/// Serializable complex number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complex64Ser {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex64Ser {
    fn from(z: Complex64) -> Self {
        Complex64Ser { re: z.re, im: z.im }
    }
}

/// `<psi, F^chi_loop psi>` with `psi = F^h_dual Omega`, compared against
/// `chi(h)^w` where `w` is the winding of the loop around the start face of
/// the dual string.
pub fn holonomy(
    model: &Model,
    chi: Char,
    h: Elem,
    dual: &DualStringPath,
    loop_: &StringPath,
) -> Result<HolonomyResult> {
    let l = model.lattice();
    let g = model.group();
    if dual.is_closed() {
        return Err(Error::InvalidArgument("the dual string must have distinct endpoints".into()));
    }
    let w = l.winding_number(loop_, dual.start())?;
    let w_end = l.winding_number(loop_, dual.end())?;
    if w_end != 0 {
        return Err(Error::InvalidArgument(format!(
            "the loop winds {w_end} times around the end face of the dual string"
        )));
    }
    let omega = model.ground_state()?;
    let psi = model.dual_string_operator(dual, h).apply(&omega);
    let measured = psi.inner(&model.string_operator(loop_, chi).apply(&psi));
    let expected = g.char_eval(chi, h).powi(w as i32);
    Ok(HolonomyResult {
        measured: measured.into(),
        expected: expected.into(),
        winding: w,
        error: (measured - expected).norm(),
    })
}
