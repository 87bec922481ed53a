//! Calendar helpers: every date difference in the engine converts to years
//! as days/365.25, while hour counts inside the amortization formula use
//! the fixed 365*24 hours/year written into that formula.

use chrono::NaiveDate;

/// Days per year used for date-difference conversions.
pub const DAYS_PER_YEAR: f64 = 365.25;

/// Hours per year inside the linear amortization formula (365 * 24).
pub const AMORTIZATION_HOURS_PER_YEAR: f64 = 365.0 * 24.0;

/// Signed difference `later - earlier` in fractional years.
pub fn years_between(earlier: NaiveDate, later: NaiveDate) -> f64 {
    (later - earlier).num_days() as f64 / DAYS_PER_YEAR
}

/// Fractional years since 1970-01-01 (regression epoch).
pub fn fractional_year(date: NaiveDate) -> f64 {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
    years_between(epoch, date)
}

/// Date reached by moving `years` (possibly negative) from `anchor`,
/// rounded to the nearest whole day.
pub fn add_years(anchor: NaiveDate, years: f64) -> NaiveDate {
    let days = (years * DAYS_PER_YEAR).round() as i64;
    anchor + chrono::Duration::days(days)
}

/// Whole days closest to an hour count (793.5 h -> 33 d).
pub fn hours_to_days(hours: f64) -> i64 {
    (hours / 24.0).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn year_differences_use_julian_year() {
        assert_eq!(years_between(d(2020, 1, 1), d(2020, 1, 1)), 0.0);
        let dy = years_between(d(2015, 5, 20), d(2022, 9, 21));
        assert!((dy - 2681.0 / 365.25).abs() < 1e-12);
    }

    #[test]
    fn add_years_round_trips_within_a_day() {
        let start = d(2023, 3, 15);
        let shifted = add_years(start, 3.676745596);
        assert_eq!(shifted, d(2026, 11, 17));
        let back = years_between(start, shifted);
        assert!((back - 3.676745596).abs() < 1.0 / 365.25);
    }

    #[test]
    fn hour_rounding_matches_training_log_convention() {
        assert_eq!(hours_to_days(793.5), 33);
        assert_eq!(hours_to_days(720.0), 30);
        assert_eq!(hours_to_days(0.0), 0);
    }
}
