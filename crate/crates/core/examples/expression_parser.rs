//! Parsing and evaluating the expressions accepted by `--seed-fn`,
//! `--base-fn` and `--alpha`, including the errors for malformed input.
//!
//!     cargo run --example expression_parser -- "x^2 - sin(pi*x)/3"

use fracconv::Expression;

fn main() {
    let user = std::env::args().nth(1);
    let samples = ["sin(3*pi*x)", "x/8", "-x^2", "2^-1", "exp(-abs(x - 0.5))", "log(x)", "2**x", "3x", "sqrt(x"];
    for text in user.as_deref().into_iter().chain(samples) {
        match Expression::parse(text) {
            Ok(e) => {
                let values: Vec<String> = [-1.0, 0.0, 0.25, 1.0]
                    .iter()
                    .map(|&x| e.evaluate(x).map_or_else(|err| format!("error ({})", err.reason), |v| format!("{v:.6}")))
                    .collect();
                println!("{text:<22} => {e}\n{:<22}    at -1, 0, 0.25, 1: {}", "", values.join(", "));
            }
            Err(err) => println!("{text:<22} !! {err}"),
        }
    }
}
