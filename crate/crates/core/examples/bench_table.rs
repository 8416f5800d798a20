use czono::analyzer::{bench, bundled_corpus, AnalyzerConfig};

fn main() {
    for (_, row) in bench(&bundled_corpus(), &AnalyzerConfig::default()) {
        match row {
            Ok(r) => println!("{r}"),
            Err(e) => println!("error: {e}"),
        }
    }
}
