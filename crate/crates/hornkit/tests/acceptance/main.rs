//! End-to-end acceptance criteria, one PASS/FAIL line each. Runs without
//! the libtest harness so the lines are always printed.

mod criteria;
mod props;

use std::panic;
use std::process::ExitCode;
use std::time::Instant;

type Outcome = Result<String, String>;

fn main() -> ExitCode {
    let all: [(&str, fn() -> Outcome); 11] = [
        ("sum_upto analysis", criteria::sum_upto_analysis),
        ("specialisation", criteria::specialisation),
        ("query-answer transformation", criteria::query_answer),
        ("widening", criteria::widening),
        ("constraint propagation", criteria::constraint_propagation),
        ("strengthening", criteria::strengthening),
        ("predicate pairing", criteria::predicate_pairing),
        ("argument filtering", criteria::argument_filtering),
        ("imperative translation", criteria::imperative_translation),
        ("self-folding rejected", criteria::self_folding),
        ("property suites", props::property_suites),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in all.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({ms} ms): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({ms} ms): {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
