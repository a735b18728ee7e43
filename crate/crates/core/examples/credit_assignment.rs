//! Spreads one keypress over the steps that could have caused it.
//!
//! At 24 steps per second with reaction delays uniform on [0.2, 0.8] s, a
//! press at t = 2.0 s lands on the steps shown between 1.2 s and 1.8 s.

use tamer_core::learner::{assign_credit, DelayPdf, FeedbackEvent, StepSpan};

fn main() -> tamer_core::Result<()> {
    let rate = 24.0;
    let pdf = DelayPdf::uniform(0.2, 0.8)?;
    let spans: Vec<StepSpan> = (0..48).map(|k| StepSpan { start: k as f64 / rate, end: (k + 1) as f64 / rate }).collect();
    let press = FeedbackEvent::new(-1, 2.0)?;
    let credit = assign_credit(&press, &spans, &pdf);
    println!("press {} at {:.3}s, steps of {:.4}s", press.value(), press.time, 1.0 / rate);
    for (k, (span, c)) in spans.iter().zip(&credit).enumerate().filter(|(_, (_, c))| **c > 0.0) {
        println!("step {k:>2} [{:.3}, {:.3}) credit {c:.4} label {:+.4}", span.start, span.end, c * press.value() as f64);
    }
    println!("total credit {:.12}", credit.iter().sum::<f64>());
    println!("a step is final once {} further steps have been taken", pdf.lag_steps(rate));
    Ok(())
}
