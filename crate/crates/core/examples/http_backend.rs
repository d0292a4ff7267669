//! One completion against an OpenAI-compatible endpoint.
//!
//! ```text
//! ADAEM_URL=https://api.openai.com/v1 ADAEM_MODEL=gpt-4o-mini \
//! ADAEM_API_KEY_REMOTE=sk-... cargo run --example http_backend -- "Should cities ban cars?"
//! ```

use adaem::backends::{Backend, BackendKind, BackendSpec, CompletionRequest, HttpBackend};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (Ok(url), Ok(model)) = (std::env::var("ADAEM_URL"), std::env::var("ADAEM_MODEL")) else {
        eprintln!("set ADAEM_URL and ADAEM_MODEL (and ADAEM_API_KEY_REMOTE if the endpoint needs a key)");
        std::process::exit(2);
    };
    let question = std::env::args().nth(1).unwrap_or_else(|| "Should cities ban cars downtown?".into());
    let backend = HttpBackend::new(BackendSpec::http("remote", BackendKind::Chat, &url, &model))?;
    println!("{}", backend.complete(&CompletionRequest::prompt(question))?);
    Ok(())
}
