//! Modulation index to RF drive power.

use std::f64::consts::PI;

use crate::drive::FourierDrive;
use crate::error::{invalid, Result};

/// RF power in dBm needed for modulation index `beta` on a modulator with
/// half-wave voltage `v_pi` into `impedance` ohms.
///
/// `V_peak = β·V_π/π`, `P = V_peak²/(2R)`. Returns `-inf` for β = 0.
pub fn rf_power_dbm(beta: f64, v_pi: f64, impedance: f64) -> Result<f64> {
    Ok(watts_to_dbm(rf_power_watts(beta, v_pi, impedance)?))
}

fn rf_power_watts(beta: f64, v_pi: f64, impedance: f64) -> Result<f64> {
    if !(v_pi > 0.0) {
        return Err(invalid(format!("half-wave voltage must be positive, got {v_pi}")));
    }
    if !(impedance > 0.0) {
        return Err(invalid(format!("impedance must be positive, got {impedance}")));
    }
    if !(beta >= 0.0) {
        return Err(invalid(format!("modulation index must be >= 0, got {beta}")));
    }
    let v_peak = beta * v_pi / PI;
    Ok(v_peak * v_peak / (2.0 * impedance))
}

fn watts_to_dbm(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * (p / 1e-3).log10()
    }
}

/// Total RF power of a multi-tone drive, summing per-harmonic powers.
/// `v_pi(k)` gives the half-wave voltage at harmonic `k`.
pub fn drive_power_dbm(drive: &FourierDrive, v_pi: impl Fn(usize) -> f64, impedance: f64) -> Result<f64> {
    let mut total = 0.0;
    for h in drive.harmonics() {
        total += rf_power_watts(h.amplitude, v_pi(h.index), impedance)?;
    }
    Ok(watts_to_dbm(total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_drive() {
        assert_eq!(rf_power_dbm(0.0, 5.37, 50.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn full_pi_swing() {
        // 5.37² / 100 W = 288.369 mW
        let want = 10.0 * (5.37f64 * 5.37 / 100.0 / 1e-3).log10();
        let got = rf_power_dbm(PI, 5.37, 50.0).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 24.6).abs() < 0.05);
    }

    #[test]
    fn bad_inputs() {
        assert!(rf_power_dbm(1.0, 0.0, 50.0).is_err());
        assert!(rf_power_dbm(1.0, -1.0, 50.0).is_err());
        assert!(rf_power_dbm(-1.0, 5.0, 50.0).is_err());
    }

    #[test]
    fn harmonics_add_in_power() {
        let d = FourierDrive::from_components(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        let one = rf_power_dbm(1.0, 5.0, 50.0).unwrap();
        let both = drive_power_dbm(&d, |_| 5.0, 50.0).unwrap();
        assert!((both - one - 10.0 * 2f64.log10()).abs() < 1e-12);
    }
}
