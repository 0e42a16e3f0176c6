use clap::Parser;

fn main() {
    let cli = match thermoform_cli::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 3 } else { 0 });
        }
    };
    std::process::exit(thermoform_cli::main_with(cli));
}
