//! gnuplot scripts for the files written by the experiment drivers.
//!
//! Scripts are run from the output directory (`gnuplot plot.gp`) and render
//! to `plot.png`.

use crate::experiments::ExperimentSpec;

const PREAMBLE: &str = "set terminal pngcairo size 1000,600\nset output 'plot.png'\nset datafile separator ','\n";

fn n_list(spec: &ExperimentSpec) -> String {
    spec.n_values.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
}

/// Side-by-side support patterns of the MPP and spinv (fig1).
pub fn support(m: usize, n: usize) -> String {
    format!(
        "set terminal pngcairo size 1000,500\n\
         set output 'plot.png'\n\
         set multiplot layout 1,2\n\
         unset colorbox\n\
         set palette gray negative\n\
         set xrange [-0.5:{m}-0.5]\n\
         set yrange [{n}-0.5:-0.5]\n\
         set title 'MPP support'\n\
         plot 'support_mpp.txt' matrix with image notitle\n\
         set title 'spinv support'\n\
         plot 'support_spinv.txt' matrix with image notitle\n\
         unset multiplot\n"
    )
}

/// Box plot of submatrix-inverse norms per experiment with the spinv norm
/// marked (fig2).
pub fn boxplot(repetitions: usize) -> String {
    format!(
        "{PREAMBLE}\
         set style data boxplot\n\
         set style boxplot outliers pointtype 7\n\
         set xrange [-0.5:{last}.5]\n\
         set logscale y\n\
         set xlabel 'experiment'\n\
         set ylabel 'Frobenius norm'\n\
         plot 'norms.csv' every ::1 using (0+$1):3:(0.5):1 title 'submatrix inverse', \\\n\
         \x20    'norms.csv' every ::1 using 1:4 with points pointtype 5 title 'spinv'\n",
        last = repetitions.saturating_sub(1)
    )
}

/// Cell means with ±1 sd bars per `n` against the predicted `(α*)²`
/// (fig3 and generic concentration runs).
pub fn means(spec: &ExperimentSpec) -> String {
    format!(
        "{PREAMBLE}\
         set xlabel 'delta = (m-1)/n'\n\
         set ylabel '(n/m) ||X||_F^2'\n\
         set key top left\n\
         ns = '{ns}'\n\
         plot 'theory.csv' every ::1 using 2:7 with lines linewidth 2 title 'theory p = {p}', \\\n\
         \x20    for [k=1:words(ns)] 'summary.csv' every ::1 \\\n\
         \x20    using 5:($2 == word(ns, k) + 0 ? $9 : 1/0):10 with yerrorbars title 'n = '.word(ns, k)\n",
        ns = n_list(spec),
        p = spec.p,
    )
}

/// Every trial of every cell against `n`, with the prediction per `δ`
/// (fig4).
pub fn realizations(spec: &ExperimentSpec) -> String {
    format!(
        "{PREAMBLE}\
         set xlabel 'n'\n\
         set ylabel '(n/m) ||X||_F^2'\n\
         set logscale x\n\
         plot 'records.csv' every ::1 using 3:(strcol(10) eq 'true' ? 1/0 : $7) with points pointtype 7 title 'trials p = {p}', \\\n\
         \x20    'summary.csv' every ::1 using 2:11 with linespoints title 'prediction'\n",
        p = spec.p,
    )
}
