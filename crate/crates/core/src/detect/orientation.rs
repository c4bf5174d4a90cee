use crate::error::{Error, Result};

pub const ORIENTATION_BINS: usize = 18;
pub const BIN_WIDTH_DEG: f64 = 10.0;

fn check_angle(theta_deg: f64) -> Result<()> {
    if !theta_deg.is_finite() {
        return Err(Error::NonFiniteInput(format!("angle {theta_deg}")));
    }
    if !(-90.0..90.0).contains(&theta_deg) {
        return Err(Error::AngleOutOfRange(theta_deg));
    }
    Ok(())
}

/// Half-open bin `[-90 + 10k, -80 + 10k)` holding `theta_deg`.
pub fn orientation_bin(theta_deg: f64) -> Result<usize> {
    check_angle(theta_deg)?;
    Ok((((theta_deg + 90.0) / BIN_WIDTH_DEG).floor() as usize).min(ORIENTATION_BINS - 1))
}

pub fn bin_center(bin: usize) -> f64 {
    -90.0 + BIN_WIDTH_DEG * (bin as f64 + 0.5)
}

/// Angle after encoding into a bin and decoding to the bin center.
pub fn orientation_bin_roundtrip(theta_deg: f64) -> Result<f64> {
    Ok(bin_center(orientation_bin(theta_deg)?))
}

/// `a - b` folded into [-90, 90): orientations are periodic in 180°.
pub fn wrapped_angle_diff(a: f64, b: f64) -> f64 {
    (a - b + 90.0).rem_euclid(180.0) - 90.0
}

pub(crate) fn validate_angle(theta_deg: f64) -> Result<()> {
    check_angle(theta_deg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins() {
        assert_eq!(orientation_bin(47.0).unwrap(), 13);
        assert_eq!(orientation_bin(-90.0).unwrap(), 0);
        assert_eq!(orientation_bin_roundtrip(-90.0).unwrap(), -85.0);
        assert_eq!(orientation_bin(0.0).unwrap(), 9);
        assert_eq!(orientation_bin_roundtrip(0.0).unwrap(), 5.0);
        assert_eq!(orientation_bin(89.999).unwrap(), 17);
        assert_eq!(orientation_bin(90.0), Err(Error::AngleOutOfRange(90.0)));
        assert!(orientation_bin(f64::NAN).is_err());
    }

    #[test]
    fn sweep_within_five_degrees() {
        let worst = (0..1000)
            .map(|i| -90.0 + 180.0 * i as f64 / 1000.0)
            .map(|t| (orientation_bin_roundtrip(t).unwrap() - t).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 5.0);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrapped_angle_diff(85.0, -85.0), -10.0);
        assert_eq!(wrapped_angle_diff(30.0, 40.0), -10.0);
    }
}
