//! Runs the brute-force oracle suite and prints one line per check.

fn main() {
    let start = std::time::Instant::now();
    let reports = orqc::oracle::run_all_oracles();
    print!("{}", orqc::oracle::render_report(&reports));
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
}
