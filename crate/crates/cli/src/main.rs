use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let mut stdout = std::io::stdout().lock();
    match ipod_cli::run(args, &mut stdout) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return match clap_err.kind() {
                    clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                        ExitCode::SUCCESS
                    }
                    _ => ExitCode::from(1),
                };
            }
            let broken_pipe = err.chain().any(|e| {
                let io = match e.downcast_ref::<ipod::IpodError>() {
                    Some(ipod::IpodError::Io(io)) => Some(io),
                    _ => e.downcast_ref::<std::io::Error>(),
                };
                io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            });
            if broken_pipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
