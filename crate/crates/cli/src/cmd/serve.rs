use std::sync::Arc;

use ai_lab_service::{ServiceConfig, SessionStore};

use crate::args::ServeArgs;
use crate::output::{CliError, CliResult, Ctx};

pub fn run(ctx: Ctx, args: ServeArgs) -> CliResult<()> {
    if let Some(dir) = &args.scenario_dir {
        if !dir.is_dir() {
            return Err(CliError::new(
                "io_error",
                format!("{} is not a directory", dir.display()),
            ));
        }
    }
    if let Some(dir) = &args.data_dir {
        std::fs::create_dir_all(dir)?;
    }
    let store = Arc::new(SessionStore::open(ServiceConfig {
        scenario_dir: args.scenario_dir,
        data_dir: args.data_dir,
        debug_oracle: args.debug_oracle,
    })?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
        let addr = listener.local_addr()?;
        if !ctx.global.quiet {
            eprintln!("listening on http://{addr}");
        }
        tokio::select! {
            r = ai_lab_service::serve(listener, store) => r?,
            _ = tokio::signal::ctrl_c() => {}
        }
        Ok(())
    })
}
