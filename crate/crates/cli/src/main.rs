use clap::Parser;
use dcpf_cli::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            match e.downcast_ref::<dcpf::Error>() {
                Some(d) => eprintln!("{}: {d}", d.kind()),
                None => eprintln!("{e:#}"),
            }
            1
        }
    };
    std::process::exit(code);
}
