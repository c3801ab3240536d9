use crate::error::{Error, Result};

/// Illinois false position on a bracketing interval, falling back to
/// bisection when the secant point stalls. Stops when `|f| < f_tol` or the
/// interval can no longer shrink.
pub(crate) fn bracketed_root<F>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    f_tol: f64,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa.abs() < f_tol {
        return Ok((a, fa));
    }
    if fb.abs() < f_tol {
        return Ok((b, fb));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!("no sign change on [{a}, {b}]")));
    }
    let mut side = 0i8;
    for iter in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        // every fourth iteration, or when the secant lands outside, bisect
        if !(c > a.min(b) && c < a.max(b)) || iter % 4 == 3 {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc.abs() < f_tol {
            return Ok((c, fc));
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
    }
    let (x, fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    Err(Error::NoRoot(format!("root bracket collapsed at {x} with residual {fx:e} above {f_tol:e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let (x, fx) = bracketed_root(f, 0.0, 3.0, -2.0, 25.0, 1e-14).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-14 && fx.abs() < 1e-14);
    }

    #[test]
    fn same_sign_is_no_root() {
        assert!(matches!(bracketed_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 2.0, 2.0, 1e-12), Err(Error::NoRoot(_))));
    }
}
