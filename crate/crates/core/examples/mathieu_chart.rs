//! Sweeps the Mathieu family over (l, Δl), prints an ASCII stability chart
//! and writes the full grid as CSV.

use paramres::chart::{sweep, write_chart_csv, Axis, CellClass, FamilyKind, SweepSpec};

fn main() -> paramres::error::Result<()> {
    let spec = SweepSpec::new(
        FamilyKind::Mathieu,
        Axis::new("l", -0.5, 5.0, 78),
        Axis::new("delta_l", 0.0, 2.0, 24),
    );
    let chart = sweep(&spec)?;
    for j in (0..24).rev() {
        let row: String = (0..78)
            .map(|i| match chart.cell(i, j).class {
                CellClass::Elliptic => '.',
                CellClass::Marginal => '|',
                CellClass::Error => '?',
                _ => '#',
            })
            .collect();
        println!("{row}");
    }
    println!("'#' unstable, '.' stable; l runs left to right, delta_l bottom to top");

    let path = std::env::temp_dir().join("mathieu_chart.csv");
    write_chart_csv(&chart, std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
