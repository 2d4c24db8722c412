//! Wall-clock timing on the monotonic clock.

use std::time::{Duration, Instant};

/// Run `f` once and measure it.
pub fn time_fit<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Median of `calls.max(1)` timed invocations of `f(i)`.
pub fn time_predict<T>(calls: usize, mut f: impl FnMut(usize) -> T) -> Duration {
    let mut samples: Vec<Duration> = (0..calls.max(1))
        .map(|i| {
            let start = Instant::now();
            std::hint::black_box(f(i));
            start.elapsed()
        })
        .collect();
    median_duration(&mut samples)
}

/// Median of the samples (mean of the two middle ones for even counts).
pub fn median_duration(samples: &mut [Duration]) -> Duration {
    if samples.is_empty() {
        return Duration::ZERO;
    }
    samples.sort_unstable();
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_op_is_fast() {
        let d = time_predict(200, |i| i + 1);
        assert!(d < Duration::from_millis(1));
    }

    #[test]
    fn median_of_even_and_odd() {
        let ms = Duration::from_millis;
        assert_eq!(median_duration(&mut [ms(3), ms(1), ms(2)]), ms(2));
        assert_eq!(median_duration(&mut [ms(4), ms(1), ms(2), ms(3)]), Duration::from_micros(2500));
        assert_eq!(median_duration(&mut []), Duration::ZERO);
    }

    #[test]
    fn repeated_fits_have_similar_cost() {
        let work = || (0..3_000_000u64).map(|i| std::hint::black_box(i).wrapping_mul(i) % 7).sum::<u64>();
        let (_, a) = time_fit(work);
        let (_, b) = time_fit(work);
        let (a, b) = (a.as_secs_f64().max(1e-7), b.as_secs_f64().max(1e-7));
        assert!(a / b < 10.0 && b / a < 10.0, "{a} vs {b}");
    }
}
