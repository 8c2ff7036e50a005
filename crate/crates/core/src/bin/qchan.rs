use clap::Parser;
use qchan::cli::{run, Cli, RunConfig};

fn main() {
    env_logger::init();
    if let Ok(threads) = std::env::var("QCHAN_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("qchan: QCHAN_THREADS = `{threads}` is not a positive integer");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse(); // clap exits with code 2 on usage errors
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qchan: {e}");
            std::process::exit(e.exit_code());
        }
    };
    if let Err(e) = run(&config) {
        eprintln!("qchan: {e}");
        std::process::exit(e.exit_code());
    }
}
