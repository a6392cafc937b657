//! Writes a small synthetic dataset with everything the CLI needs to run on
//! it, including a `config.toml`: `cargo run --example write_fixture -- <dir> [prompts] [per_prompt] [seed]`.

use std::fs;
use std::path::PathBuf;

use sasgrade::corpus::write_asap_tsv;
use sasgrade::embeddings::write_text;
use sasgrade::synthetic::{synthetic_embeddings, synthetic_set, synthetic_vocabulary};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixture".into()));
    let mut num = |default: u64| args.next().map_or(default, |a| a.parse().expect("numeric argument"));
    let (n_prompts, per_prompt, seed) = (num(2) as usize, num(15) as usize, num(1));

    let set = synthetic_set(n_prompts, per_prompt, seed);
    fs::create_dir_all(dir.join("refs"))?;
    fs::write(dir.join("train.tsv"), write_asap_tsv(&set.responses))?;

    let mut toml = String::new();
    for p in set.prompts.iter() {
        let mut refs = Vec::new();
        for (i, doc) in p.reference_docs.iter().enumerate() {
            let name = format!("refs/{}_{}.txt", p.prompt_id, i + 1);
            fs::write(dir.join(&name), doc)?;
            refs.push(format!("{name:?}"));
        }
        toml.push_str(&format!(
            "[[prompt]]\nid = {:?}\nquestion = {:?}\npassage = {:?}\ngrade_min = {}\ngrade_max = {}\nreference_docs = [{}]\n\n",
            p.prompt_id,
            p.question_text,
            p.reference_docs.join(" "),
            p.grade_min,
            p.grade_max,
            refs.join(", ")
        ));
    }
    fs::write(dir.join("prompts.toml"), toml)?;

    fs::write(dir.join("vectors.txt"), write_text(&synthetic_embeddings::<f64>(8, seed)))?;
    let vocab = synthetic_vocabulary();
    let freq: String = vocab.iter().enumerate().map(|(i, w)| format!("{w} {}\n", vocab.len() - i)).collect();
    fs::write(dir.join("frequencies.txt"), freq)?;
    fs::write(
        dir.join("config.toml"),
        "output = \"out\"\n\n[data]\ndataset = \"train.tsv\"\nprompts = \"prompts.toml\"\n\n\
         [resources]\nembeddings = \"vectors.txt\"\nfrequency_lexicon = \"frequencies.txt\"\n",
    )?;
    Ok(())
}
