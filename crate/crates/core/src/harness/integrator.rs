//! Fixed-step classical Runge–Kutta integration.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// One RK4 step of `ẋ = f(t, x)` from `(t, x)` to `t + dt`.
///
/// `f` is called at the four stage points in order; a non-finite derivative
/// aborts with the stage time.
pub fn rk4_step<const N: usize, F>(x: &SVector<f64, N>, t: f64, dt: f64, mut f: F) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Simulation {
            time: t,
            reason: format!("step must be positive, got {dt}"),
        });
    }
    let mut eval = |time: f64, state: &SVector<f64, N>| -> Result<SVector<f64, N>> {
        let d = f(time, state)?;
        if d.iter().all(|v| v.is_finite()) {
            Ok(d)
        } else {
            Err(Error::Simulation {
                time,
                reason: "non-finite state derivative".into(),
            })
        }
    };
    let h = dt / 2.0;
    let k1 = eval(t, x)?;
    let k2 = eval(t + h, &(x + k1 * h))?;
    let k3 = eval(t + h, &(x + k2 * h))?;
    let k4 = eval(t + dt, &(x + k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}
