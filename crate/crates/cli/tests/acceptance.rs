//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! before asserting, so `cargo test -- --nocapture` reads as a report.

use std::f64::consts::PI;
use std::fs;
use std::panic::catch_unwind;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use dcdt::analysis::{hill_block_costs, mode_histogram, random_block_costs, spearman, ModeHistogram};
use dcdt::dcdt::{dcdt_cost, p_for_qf, p_from_table, spatial_block, DcdtParams, Steganalyzer};
use dcdt::dct::{decompress, spatial_change, Block, DctBasis, SpatialImage};
use dcdt::embed::{change_probs, embed, guard_range, jpeg_costs, EmbedConfig, WET_COST};
use dcdt::mde::{candidate_cost, mde_embed_detailed, optimize_block, update_costs};
use dcdt::rng::StegoRng;
use dcdt::spatial_cost::{hill_cost, CostMap, Hill};
use dcdt::{parse_jpeg, serialize_jpeg, JpegImage, QuantTable};

fn testdata(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../testdata").join(rel)
}

fn read(rel: &str) -> Vec<u8> {
    fs::read(testdata(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn load(rel: &str) -> JpegImage {
    parse_jpeg(&read(rel)).unwrap()
}

fn jpegs_in(dir: &str) -> Vec<String> {
    let mut names: Vec<_> = fs::read_dir(testdata(dir))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".jpg"))
        .map(|n| format!("{dir}/{n}"))
        .collect();
    names.sort();
    names
}

fn q75_images() -> Vec<(String, JpegImage)> {
    jpegs_in("q75").into_iter().map(|n| (n.clone(), load(&n))).collect()
}

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:02} {name}: {verdict} ({detail})");
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Orthonormal DCT-II basis from the cosine formula, independent of the library.
fn textbook_basis(u: usize, i: usize) -> f64 {
    let c = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
    c * ((2 * i + 1) as f64 * u as f64 * PI / 16.0).cos()
}

fn textbook_change(t: &[i8; 64], quant: &QuantTable) -> [f64; 64] {
    let mut out = [0.0; 64];
    for i in 0..8 {
        for j in 0..8 {
            let mut s = 0.0;
            for k in 0..8 {
                for l in 0..8 {
                    let v = t[k * 8 + l];
                    if v != 0 {
                        s += v as f64 * quant.step(k, l) as f64 * textbook_basis(k, i) * textbook_basis(l, j);
                    }
                }
            }
            out[i * 8 + j] = s;
        }
    }
    out
}

fn random_quant(rng: &mut StegoRng) -> QuantTable {
    let mut steps = [0u16; 64];
    for s in steps.iter_mut() {
        *s = 1 + (rng.next_u64() % 255) as u16;
    }
    QuantTable::new(steps).unwrap()
}

fn random_cost_map(rng: &mut StegoRng, bh: usize, bw: usize) -> CostMap {
    let (h, w) = (bh * 8, bw * 8);
    let values = (0..h * w)
        .map(|_| {
            let u = rng.uniform_open_low();
            // Spread over many orders of magnitude, like real HiLL output.
            10f64.powf(8.0 * u - 3.0)
        })
        .collect();
    CostMap::new(w, h, values).unwrap()
}

#[test]
fn criterion_01_dct_correctness() {
    let start = Instant::now();
    let a = DctBasis::get().matrix();
    let mut orth = 0.0f64;
    for r in 0..8 {
        for c in 0..8 {
            let dot: f64 = (0..8).map(|k| a[r][k] * a[c][k]).sum();
            let expect = if r == c { 1.0 } else { 0.0 };
            orth = orth.max((dot - expect).abs());
        }
    }
    let mut norm = 0.0f64;
    for k in 0..64 {
        for q in 1..=255u16 {
            let s = spatial_change(k / 8, k % 8, q).unwrap();
            let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            norm = norm.max((n - q as f64).abs());
        }
    }
    let basis = DctBasis::get();
    let mut rng = StegoRng::new(1);
    let mut roundtrip = 0.0f64;
    for _ in 0..1000 {
        let coeffs: Block = std::array::from_fn(|_| (rng.uniform() - 0.5) * 2048.0);
        let pixels: Block = std::array::from_fn(|_| (rng.uniform() - 0.5) * 255.0);
        let c2 = basis.forward(&basis.inverse(&coeffs));
        let p2 = basis.inverse(&basis.forward(&pixels));
        for k in 0..64 {
            roundtrip = roundtrip.max((c2[k] - coeffs[k]).abs()).max((p2[k] - pixels[k]).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = orth <= 1e-12 && norm <= 1e-9 && roundtrip <= 1e-9 && elapsed < 5.0;
    report(
        1,
        "dct-correctness",
        pass,
        format!("|AAt-I|={orth:.2e} |norm-q|={norm:.2e} roundtrip={roundtrip:.2e} time={elapsed:.3}s"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_unit_exponent_matches_literal_sum_bitwise() {
    let mut rng = StegoRng::new(2);
    let mut mismatches = 0usize;
    let mut cells = 0usize;
    for _ in 0..100 {
        let bh = 1 + (rng.next_u64() % 3) as usize;
        let bw = 1 + (rng.next_u64() % 3) as usize;
        let costs = random_cost_map(&mut rng, bh, bw);
        let quant = random_quant(&mut rng);
        let rho = dcdt_cost(&costs, &quant, 1.0).unwrap();
        for m in 0..bh {
            for n in 0..bw {
                for k in 0..64 {
                    let s = spatial_change(k / 8, k % 8, quant.steps()[k]).unwrap();
                    let mut literal = 0.0;
                    for i in 0..8 {
                        for j in 0..8 {
                            literal += costs.get(m * 8 + i, n * 8 + j) * s[i * 8 + j].abs();
                        }
                    }
                    cells += 1;
                    if rho.rho.get(m, n, k).to_bits() != literal.to_bits() {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let pass = mismatches == 0;
    report(2, "unit-exponent-bitwise", pass, format!("{cells} coefficients, {mismatches} mismatches"));
    assert!(pass);
}

fn naive_hill(width: usize, height: usize, x: &[f64]) -> Vec<f64> {
    let reflect = |i: isize, n: usize| -> usize {
        let n = n as isize;
        let r = if i < 0 {
            -i - 1
        } else if i >= n {
            2 * n - i - 1
        } else {
            i
        };
        r as usize
    };
    let kb = [[-1.0, 2.0, -1.0], [2.0, -4.0, 2.0], [-1.0, 2.0, -1.0]];
    let filter = |src: &[f64], radius: isize, f: &dyn Fn(isize, isize) -> f64| -> Vec<f64> {
        let mut out = vec![0.0; width * height];
        for r in 0..height as isize {
            for c in 0..width as isize {
                let mut s = 0.0;
                for dr in -radius..=radius {
                    for dc in -radius..=radius {
                        s += f(dr, dc) * src[reflect(r + dr, height) * width + reflect(c + dc, width)];
                    }
                }
                out[r as usize * width + c as usize] = s;
            }
        }
        out
    };
    let residual = filter(x, 1, &|dr, dc| kb[(dr + 1) as usize][(dc + 1) as usize]);
    let abs: Vec<f64> = residual.iter().map(|v| v.abs()).collect();
    let smooth = filter(&abs, 1, &|_, _| 1.0 / 9.0);
    let inv: Vec<f64> = smooth.iter().map(|v| 1.0 / (v + 1e-10)).collect();
    filter(&inv, 7, &|_, _| 1.0 / 225.0)
}

#[test]
fn criterion_03_naive_oracles() {
    let mut rng = StegoRng::new(3);

    let mut dcdt_worst = 0.0f64;
    for _ in 0..100 {
        let bh = 1 + (rng.next_u64() % 2) as usize;
        let bw = 1 + (rng.next_u64() % 2) as usize;
        let costs = random_cost_map(&mut rng, bh, bw);
        let quant = random_quant(&mut rng);
        let p = 0.3 + 1.2 * rng.uniform();
        let rho = dcdt_cost(&costs, &quant, p).unwrap();
        for m in 0..bh {
            for n in 0..bw {
                for k in 0..64 {
                    let mut t = [0i8; 64];
                    t[k] = 1;
                    let s = textbook_change(&t, &quant);
                    let mut expect = 0.0;
                    for i in 0..8 {
                        for j in 0..8 {
                            expect += costs.get(m * 8 + i, n * 8 + j).powf(p) * s[i * 8 + j].abs();
                        }
                    }
                    dcdt_worst = dcdt_worst.max(rel_err(rho.rho.get(m, n, k), expect));
                }
            }
        }
    }

    let mut cand_worst = 0.0f64;
    for _ in 0..200 {
        let costs = random_cost_map(&mut rng, 1, 1);
        let d = spatial_block(&costs, 0, 0);
        let quant = random_quant(&mut rng);
        let p = 0.3 + 1.2 * rng.uniform();
        let mut t = [0i8; 64];
        let n = 1 + (rng.next_u64() % 10) as usize;
        for _ in 0..n {
            let k = (rng.next_u64() % 64) as usize;
            t[k] = if rng.uniform() < 0.5 { -1 } else { 1 };
        }
        let s = textbook_change(&t, &quant);
        let expect: f64 = (0..64).map(|c| d[c].powf(p) * s[c].abs()).sum();
        cand_worst = cand_worst.max(rel_err(candidate_cost(&t, &d, &quant, p), expect));
    }

    let mut hill_worst = 0.0f64;
    for _ in 0..100 {
        let w = 8 + (rng.next_u64() % 33) as usize;
        let h = 8 + (rng.next_u64() % 33) as usize;
        let pixels: Vec<f64> = (0..w * h).map(|_| (rng.next_u64() % 256) as f64).collect();
        let got = hill_cost(&SpatialImage::new(w, h, pixels.clone()));
        let expect = naive_hill(w, h, &pixels);
        for (g, e) in got.values.iter().zip(&expect) {
            hill_worst = hill_worst.max(rel_err(*g, *e));
        }
    }

    let pass = dcdt_worst <= 1e-9 && cand_worst <= 1e-9 && hill_worst <= 1e-9;
    report(
        3,
        "naive-oracles",
        pass,
        format!("dcdt={dcdt_worst:.2e} candidate={cand_worst:.2e} hill={hill_worst:.2e} (100/200/100 instances)"),
    );
    assert!(pass);
}

fn mutate(seed: &[u8], rng: &mut StegoRng, kind: u64) -> Vec<u8> {
    let mut bytes = seed.to_vec();
    match kind {
        0 => {
            let flips = 1 + rng.next_u64() % 8;
            for _ in 0..flips {
                let i = (rng.next_u64() % bytes.len() as u64) as usize;
                bytes[i] ^= 1 << (rng.next_u64() % 8);
            }
        }
        1 => bytes.truncate((rng.next_u64() % bytes.len() as u64) as usize),
        2 => {
            let start = (rng.next_u64() % bytes.len() as u64) as usize;
            let len = 1 + (rng.next_u64() % 32) as usize;
            for b in bytes.iter_mut().skip(start).take(len) {
                *b = rng.next_u64() as u8;
            }
        }
        _ => {
            let len = (rng.next_u64() % 600) as usize;
            bytes = (0..len).map(|_| rng.next_u64() as u8).collect();
            if rng.uniform() < 0.5 && bytes.len() >= 2 {
                bytes[0] = 0xFF;
                bytes[1] = 0xD8;
            }
        }
    }
    bytes
}

#[test]
fn criterion_04_codec_roundtrip_and_fuzz() {
    let start = Instant::now();
    let mut corpus = jpegs_in("q75");
    corpus.extend(jpegs_in("mixed"));
    let mut roundtrip_ok = 0;
    for name in &corpus {
        let image = load(name);
        let back = parse_jpeg(&serialize_jpeg(&image).unwrap()).unwrap();
        if back.coeffs == image.coeffs && back.quant_table == image.quant_table {
            roundtrip_ok += 1;
        }
    }

    let seeds: Vec<Vec<u8>> = jpegs_in("mixed").iter().map(|n| read(n)).collect();
    let mut rng = StegoRng::new(4);
    let mut crashes = 0usize;
    let mut accepted = 0usize;
    let fuzz_runs = 100_000;
    for i in 0..fuzz_runs {
        let seed = &seeds[i % seeds.len()];
        let input = mutate(seed, &mut rng, (i / seeds.len()) as u64 % 4);
        let outcome = catch_unwind(|| {
            if let Ok(image) = parse_jpeg(&input) {
                if let Ok(bytes) = serialize_jpeg(&image) {
                    let _ = parse_jpeg(&bytes);
                }
                true
            } else {
                false
            }
        });
        match outcome {
            Ok(true) => accepted += 1,
            Ok(false) => {}
            Err(_) => crashes += 1,
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = corpus.len() >= 20 && roundtrip_ok == corpus.len() && crashes == 0 && elapsed < 60.0;
    report(
        4,
        "codec-roundtrip-fuzz",
        pass,
        format!(
            "{roundtrip_ok}/{} images exact, {fuzz_runs} fuzz inputs, {crashes} crashes, {accepted} accepted, time={elapsed:.1}s",
            corpus.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_payload_bound() {
    let start = Instant::now();
    let images = q75_images();
    assert_eq!(images.len(), 10);
    let mut worst_entropy = 0.0f64;
    let mut worst_sigma = 0.0f64;
    let mut runs = 0;
    for (idx, (_, image)) in images.iter().enumerate() {
        let params = DcdtParams::auto(75, Steganalyzer::ScaGfr).unwrap();
        let (_, rho) = jpeg_costs(image, &Hill::default(), params.p).unwrap();
        let guarded = guard_range(&rho, image, WET_COST).unwrap();
        for (ai, alpha) in [0.1, 0.2, 0.3, 0.4, 0.5].into_iter().enumerate() {
            let config = EmbedConfig::new(alpha, params, 1000 + 10 * idx as u64 + ai as u64);
            let out = embed(image, &config).unwrap();
            let target = alpha * image.count_nonzero_ac() as f64;
            worst_entropy = worst_entropy.max((out.entropy - target).abs() / target);
            let probs = change_probs(&guarded, out.lambda);
            let (mut mean, mut var) = (0.0, 0.0);
            for (bp, bm) in probs.beta_plus.values().zip(probs.beta_minus.values()) {
                let b = bp + bm;
                mean += b;
                var += b * (1.0 - b);
            }
            let z = (out.changes() as f64 - mean).abs() / var.sqrt();
            worst_sigma = worst_sigma.max(z);
            runs += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_entropy <= 1e-3 && worst_sigma <= 3.0 && elapsed < 120.0;
    report(
        5,
        "payload-bound",
        pass,
        format!("{runs} embeddings, worst entropy error {:.4}%, worst |z|={worst_sigma:.2}, time={elapsed:.1}s", worst_entropy * 100.0),
    );
    assert!(pass);
}

#[test]
fn criterion_06_parameter_constants() {
    use Steganalyzer::*;
    let table = [
        (75, CcJrm, 0.7),
        (75, Gfr, 0.7),
        (75, ScaGfr, 0.5),
        (95, CcJrm, 0.9),
        (95, Gfr, 1.1),
        (95, ScaGfr, 0.9),
        (80, ScaGfr, 0.6),
        (85, ScaGfr, 0.6),
        (90, ScaGfr, 0.8),
    ];
    let cells_ok = table.iter().all(|&(qf, s, p)| p_from_table(qf, s).unwrap() == p);
    let ends_ok = (p_for_qf(75).unwrap() - 0.48).abs() < 1e-12 && (p_for_qf(95).unwrap() - 0.88).abs() < 1e-12;
    let residual = [75, 80, 85, 90, 95]
        .iter()
        .map(|&qf| (p_for_qf(qf).unwrap() - p_from_table(qf, ScaGfr).unwrap()).abs())
        .fold(0.0f64, f64::max);
    let pass = cells_ok && ends_ok && (residual - 0.08).abs() < 1e-12;
    report(
        6,
        "parameter-constants",
        pass,
        format!("table cells exact={cells_ok}, p(75)={} p(95)={}, max residual={residual:.4}", p_for_qf(75).unwrap(), p_for_qf(95).unwrap()),
    );
    assert!(pass);
}

#[test]
fn criterion_07_random_costs_uncorrelated_with_hill() {
    let images = q75_images();
    let mut sccs = Vec::new();
    for (i, (_, image)) in images.iter().enumerate() {
        let hill = hill_block_costs(image);
        let rand = random_block_costs(hill.values.len(), 7000 + i as u64);
        sccs.push(spearman(&rand.values, &hill.values).unwrap());
    }
    let mean = sccs.iter().sum::<f64>() / sccs.len() as f64;
    let pass = mean.abs() < 0.05;
    report(7, "null-scc", pass, format!("mean SCC over {} images = {mean:+.4}", sccs.len()));
    assert!(pass);
}

#[test]
fn criterion_08_mde_optimality() {
    let mut blocks = 0usize;
    let mut disagreements = 0usize;
    let mut product_cells = 0usize;
    let mut product_exact = 0usize;
    let mut product_worst = 0.0f64;
    for (i, (_, image)) in q75_images().iter().enumerate() {
        if blocks >= 100 {
            break;
        }
        let params = DcdtParams::explicit(0.5).unwrap();
        let mut config = EmbedConfig::new(0.4, params, 800 + i as u64);
        config.mde = true;
        let detail = mde_embed_detailed(image, &config, &Hill::default()).unwrap();
        let spatial = hill_cost(&decompress(image));
        let quant = &image.quant_table;
        for (r, c, trial) in detail.trial.m.iter_blocks() {
            let support: Vec<usize> = (0..64).filter(|&k| trial[k] != 0).collect();
            if support.is_empty() || support.len() > 10 || blocks >= 100 {
                continue;
            }
            let d = spatial_block(&spatial, r, c);
            let mut best = f64::INFINITY;
            for bits in 0u32..(1 << support.len()) {
                let mut t = [0i8; 64];
                for (j, &k) in support.iter().enumerate() {
                    t[k] = if bits >> j & 1 == 1 { 1 } else { -1 };
                }
                best = best.min(candidate_cost(&t, &d, quant, params.p));
            }
            let chosen = optimize_block(trial, &d, quant, params.p, config.t);
            let same_support = (0..64).all(|k| (chosen.block[k] != 0) == (trial[k] != 0));
            if !same_support || candidate_cost(&chosen.block, &d, quant, params.p) != best {
                disagreements += 1;
            }
            blocks += 1;
        }

        let (_, rho) = jpeg_costs(image, &Hill::default(), params.p).unwrap();
        let updated = update_costs(&rho, &detail.optimized, config.v).unwrap();
        for (r, c, block) in detail.optimized.m_prime.m.iter_blocks() {
            for k in 0..64 {
                if block[k] == 0 {
                    continue;
                }
                let base = rho.rho.get(r, c, k);
                let prod = updated.plus().get(r, c, k) * updated.minus().get(r, c, k);
                let sq = base * base;
                product_cells += 1;
                if prod == sq {
                    product_exact += 1;
                }
                product_worst = product_worst.max(rel_err(prod, sq));
            }
        }
    }
    // The product of ρ/v and ρ·v equals ρ² up to the rounding of three
    // floating-point operations.
    let ulp_bound = 4.0 * f64::EPSILON;
    let pass = blocks == 100 && disagreements == 0 && product_cells > 0 && product_worst <= ulp_bound;
    report(
        8,
        "mde-optimality",
        pass,
        format!(
            "{blocks} blocks vs brute force, {disagreements} disagreements; rho+*rho- vs rho^2 on {product_cells} cells: {product_exact} bit-exact, worst rel {product_worst:.2e} (bound {ulp_bound:.2e})"
        ),
    );
    assert!(pass);
}

fn run_embed(dir: &std::path::Path, tag: &str, mde: bool) -> (Vec<u8>, Vec<u8>) {
    let stego = dir.join(format!("{tag}.jpg"));
    let map = dir.join(format!("{tag}.csv"));
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dcdt"));
    cmd.arg("embed")
        .arg(testdata("mixed/coins_q75_37x53.jpg"))
        .arg(&stego)
        .args(["--payload", "0.4", "--seed", "2024", "--map"])
        .arg(&map);
    if mde {
        cmd.arg("--mde");
    }
    let status = cmd.output().unwrap().status;
    assert!(status.success());
    (fs::read(stego).unwrap(), fs::read(map).unwrap())
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut checks = Vec::new();
    for (mde, golden) in [(false, "golden/coins_a04_s2024"), (true, "golden/coins_a04_s2024_mde")] {
        let first = run_embed(dir.path(), &format!("a{mde}"), mde);
        let second = run_embed(dir.path(), &format!("b{mde}"), mde);
        let gold = (read(&format!("{golden}.jpg")), read(&format!("{golden}_map.csv")));
        checks.push(first == second);
        checks.push(first == gold);
    }
    let pass = checks.iter().all(|&c| c);
    report(
        9,
        "determinism",
        pass,
        format!("repeat runs identical and matching golden files (plain, mde): {checks:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_exponent_shifts_high_frequency_mass() {
    let images = q75_images();
    let mut low_p = Vec::new();
    let mut high_p = Vec::new();
    let mut per_image = Vec::new();
    for (i, (name, image)) in images.iter().enumerate() {
        let seed = 500 + i as u64;
        let a = embed(image, &EmbedConfig::new(0.4, DcdtParams::explicit(0.7).unwrap(), seed)).unwrap();
        let b = embed(image, &EmbedConfig::new(0.4, DcdtParams::explicit(1.5).unwrap(), seed))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let (ha, hb) = (mode_histogram(&a.map), mode_histogram(&b.map));
        per_image.push(format!(
            "{}:{:.2}/{:.2}",
            name.trim_start_matches("q75/").trim_end_matches(".jpg"),
            ha.high_frequency_mass(10),
            hb.high_frequency_mass(10)
        ));
        low_p.push(ha);
        high_p.push(hb);
    }
    let mass_low = ModeHistogram::merge(&low_p).high_frequency_mass(10);
    let mass_high = ModeHistogram::merge(&high_p).high_frequency_mass(10);
    let pass = mass_low > mass_high;
    report(
        10,
        "high-frequency-mass",
        pass,
        format!("pooled a+b>=10 mass p=0.7: {mass_low:.3}% vs p=1.5: {mass_high:.3}%; per image {}", per_image.join(" ")),
    );
    assert!(pass);
}
