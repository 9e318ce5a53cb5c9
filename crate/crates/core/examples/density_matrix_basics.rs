//! Dense density-matrix primitives: gates, partial traces, partial
//! transposes and entropies on a Bell pair.

use orqc::linalg::{
    apply_gate, partial_trace, partial_transpose, hermitian_eigenvalues, renyi2_entropy, vn_entropy,
    ComplexMatrix, DensityMatrix, QubitSubset, C64, ONE, ZERO,
};

fn main() -> orqc::Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = ComplexMatrix::from_real(2, 2, &[h, h, h, -h])?;
    let cnot = ComplexMatrix::from_vec(
        4,
        4,
        vec![
            ONE, ZERO, ZERO, ZERO, //
            ZERO, ONE, ZERO, ZERO, //
            ZERO, ZERO, ZERO, ONE, //
            ZERO, ZERO, ONE, ZERO,
        ],
    )?;

    let mut rho = DensityMatrix::basis(2, 0);
    rho = apply_gate(&rho, &hadamard, &QubitSubset::new([0])?)?;
    rho = apply_gate(&rho, &cnot, &QubitSubset::new([0, 1])?)?;
    println!("Bell state (real part):");
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|c| format!("{:5.2}", rho.matrix()[(r, c)].re)).collect();
        println!("  {}", row.join(" "));
    }
    println!("purity {:.6}", rho.purity());

    let marginal = partial_trace(&rho, &QubitSubset::new([0])?)?;
    println!("qubit 0 marginal diag {:?}", [marginal.matrix()[(0, 0)].re, marginal.matrix()[(1, 1)].re]);
    println!("S_vN = {:.6}, S_2 = {:.6}", vn_entropy(&marginal), renyi2_entropy(&marginal));

    let pt = partial_transpose(&rho, &QubitSubset::new([1])?)?;
    println!("partial-transpose spectrum {:?}", hermitian_eigenvalues(&pt)?);

    let mixed = DensityMatrix::new(ComplexMatrix::diagonal(&[C64::new(0.75, 0.0), C64::new(0.25, 0.0)]))?;
    println!("diag(3/4, 1/4): S_vN = {:.4}, S_2 = {:.4}", vn_entropy(&mixed), renyi2_entropy(&mixed));
    Ok(())
}
