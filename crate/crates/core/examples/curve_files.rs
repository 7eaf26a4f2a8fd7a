//! Writing and reading curves as JSON and CSV, plus a tidy plot table.

use curve_thickness::{fixtures, io};

fn main() {
    let dir = std::env::temp_dir();
    let c = fixtures::concentric(1.0, 3.0, 100, 300);
    for name in ["concentric.json", "concentric.csv"] {
        let path = dir.join(name);
        io::write_curve(&path, &c).unwrap();
        let back = io::read_curve(&path).unwrap();
        println!(
            "{}: {} components, round trip exact: {}",
            path.display(),
            back.num_components(),
            back == c
        );
    }
    let table = io::curve_table(&c).to_csv();
    println!("{}", table.lines().take(3).collect::<Vec<_>>().join("\n"));
}
