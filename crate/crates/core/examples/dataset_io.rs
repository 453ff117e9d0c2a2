//! Dataset persistence: binary format, CSV export, determinism.
//!
//! cargo run --release -p photonest --example dataset_io

use photonest::sim::{generate_dataset, Dataset, NoiseConfig, ParameterBox};

fn main() -> photonest::Result<()> {
    let ds = generate_dataset(ParameterBox::standard_1d(), 200, 48, NoiseConfig::default(), 99)?;
    ds.write_binary("demo.pcnt")?;
    ds.write_csv("demo.csv")?;

    let back = Dataset::read_binary("demo.pcnt")?;
    println!("wrote demo.pcnt ({} records) and demo.csv", back.records.len());
    println!("roundtrip bitwise-identical: {}", back == ds);
    println!(
        "header: n_clicks {}, seed {}, generator {:?}, box {:?}",
        back.meta.n_clicks, back.meta.seed, back.meta.generator, back.meta.bounds
    );

    let again = generate_dataset(ParameterBox::standard_1d(), 200, 48, NoiseConfig::default(), 99)?;
    println!("regeneration with the same seed identical: {}", again == ds);
    Ok(())
}
