//! Train the default encoder-decoder forecaster for a few epochs on a short
//! synthetic chain and report the loss curve.

use informer_options::data::{prepare, PrepareConfig, WindowConfig};
use informer_options::market::Scenario;
use informer_options::model::{Informer, ModelConfig};
use informer_options::nn::SequenceModel;
use informer_options::training::{train, TrainConfig};

fn main() -> informer_options::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let chain = Scenario { n_days: 400, ..Scenario::default() }.generate(5)?;
    let window = WindowConfig { stride: 3, ..WindowConfig::default() };
    let (_, split, summary) = prepare(&chain, &PrepareConfig { window, ..PrepareConfig::default() })?;
    println!("{} train / {} validation windows", summary.train, summary.validation);

    let mut model = Informer::new(ModelConfig::default(), 1)?;
    println!("{} parameters", model.params().count());
    let cfg = TrainConfig { max_epochs: epochs, seed: 1, ..TrainConfig::default() };
    let history = train(&mut model, &split, &cfg)?;
    for (e, (tr, va)) in history.train_loss.iter().zip(&history.val_loss).enumerate() {
        println!("epoch {:3}  train {tr:.6}  validation {va:.6}", e + 1);
    }
    println!("kept epoch {} ({:?})", history.best_epoch + 1, history.stop_reason);
    Ok(())
}
