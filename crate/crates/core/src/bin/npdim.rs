use std::io::Write;

fn main() {
    let (code, out, err) = npdim::run_command(std::env::args_os());
    print!("{out}");
    let _ = std::io::stdout().flush();
    eprint!("{err}");
    std::process::exit(code);
}
