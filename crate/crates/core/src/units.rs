//! Decibel conversions and physical constants.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Floor for log displays of numerical zeros.
pub const DB_FLOOR: f64 = -300.0;

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10·log10(p)`, clamped at [`DB_FLOOR`].
pub fn power_to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Voltage gain for a power level in dB.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn amplitude_to_db(a: f64) -> f64 {
    power_to_db(a * a)
}

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}
