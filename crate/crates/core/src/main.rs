use std::io;

fn main() {
    let stdin = io::stdin();
    let code = kedit_stream::cli::run(
        std::env::args_os(),
        Box::new(stdin.lock()),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
