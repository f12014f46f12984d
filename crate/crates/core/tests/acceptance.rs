//! One PASS/FAIL line per acceptance criterion.

use horseshoe_entropy::report::{run_criteria, UNATTAINABLE};

fn main() {
    let outcomes = run_criteria(None).unwrap();
    let mut unexpected = Vec::new();
    for c in &outcomes {
        println!("{} criterion {:2}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.title);
        for k in c.checks.iter().filter(|k| !k.pass) {
            let known = UNATTAINABLE.contains(&(c.id, k.name.as_str()));
            println!("     failed check: {} ({}){}", k.name, k.detail, if known { " [unattainable]" } else { "" });
            if !known {
                unexpected.push(format!("{}: {}", c.id, k.name));
            }
        }
    }
    assert_eq!(outcomes.len(), 13);
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
