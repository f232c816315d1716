use pepsim::analysis::fit_gaussian;
use pepsim::ccd::{
    calibrate, find_clusters, run_corpus, smear_energy, synthesize_frame, ClusterThresholds, CorpusSpec,
    FrameSynthesis, Hit, ResolutionModel,
};
use pepsim::rng::SeedTree;
use rand_distr::{Distribution, Poisson};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson as PoissonPmf};

#[test]
fn track_counts_follow_poisson_3() {
    let settings = FrameSynthesis {
        width: 32,
        height: 32,
        noise_sigma_adc: 0.0,
        track_rate: 3.0,
        ..FrameSynthesis::default()
    };
    let seeds = SeedTree::new(41);
    let frames = 10_000;
    let cap = 9;
    let mut observed = vec![0u64; cap + 1];
    for i in 0..frames {
        let mut rng = seeds.stream("tracks", i);
        let n = synthesize_frame(&[], &settings, &mut rng).unwrap().tracks.len();
        observed[n.min(cap)] += 1;
    }
    let pmf = PoissonPmf::new(3.0).unwrap();
    let mut chi2 = 0.0;
    for (k, &o) in observed.iter().enumerate() {
        let p = if k < cap {
            pmf.pmf(k as u64)
        } else {
            1.0 - (0..cap as u64).map(|j| pmf.pmf(j)).sum::<f64>()
        };
        let e = p * frames as f64;
        chi2 += (o as f64 - e).powi(2) / e;
    }
    let crit = ChiSquared::new(cap as f64).unwrap().inverse_cdf(0.99);
    assert!(chi2 < crit, "chi2 {chi2} >= {crit}, counts {observed:?}");
}

#[test]
fn corpus_acceptance_and_rejection() {
    let spec = CorpusSpec {
        frames: 10_000,
        hits_per_frame: 3,
        hit_energy_kev: 7.729,
        synthesis: FrameSynthesis {
            width: 96,
            height: 96,
            track_rate: 1.0,
            ..FrameSynthesis::default()
        },
        thresholds: ClusterThresholds::default(),
        seed: 2005,
    };
    // 7.729 keV at 1 eV/ADC over 10 ADC noise is far above SNR 10.
    let stats = run_corpus(&spec).unwrap();
    assert!(stats.xray_acceptance() >= 0.95, "acceptance {}", stats.xray_acceptance());
    assert!(stats.track_rejection() >= 0.99, "rejection {}", stats.track_rejection());
    assert_eq!(run_corpus(&spec).unwrap(), stats);
}

#[test]
fn separated_hits_are_recovered_in_place() {
    let settings = FrameSynthesis {
        width: 64,
        height: 64,
        ..FrameSynthesis::default()
    };
    let seeds = SeedTree::new(43);
    for trial in 0..50 {
        let mut rng = seeds.stream("recovery", trial);
        let k = 1 + (trial as u32 % 9);
        let hits: Vec<Hit> = (0..k)
            .map(|i| Hit {
                x: 6 + 20 * (i % 3),
                y: 6 + 20 * (i / 3),
                energy_kev: 6.0 + 0.5 * f64::from(i),
            })
            .collect();
        let frame = synthesize_frame(&hits, &settings, &mut rng).unwrap().frame;
        let clusters = find_clusters(&frame, &ClusterThresholds::default(), settings.noise_sigma_adc);
        assert_eq!(clusters.len(), k as usize, "trial {trial}");
        for h in &hits {
            let near = clusters.iter().any(|c| {
                let (cx, cy) = c.centroid();
                (cx - f64::from(h.x)).abs() <= 1.0 && (cy - f64::from(h.y)).abs() <= 1.0
            });
            assert!(near, "hit at ({}, {}) not recovered in trial {trial}", h.x, h.y);
        }
    }
}

#[test]
fn energy_round_trip_is_unbiased() {
    let settings = FrameSynthesis {
        width: 16,
        height: 16,
        ..FrameSynthesis::default()
    };
    let seeds = SeedTree::new(44);
    let e = 7.729;
    let mut recovered = Vec::new();
    for trial in 0..1000 {
        let mut rng = seeds.stream("round-trip", trial);
        let hit = Hit { x: 8, y: 8, energy_kev: e };
        let frame = synthesize_frame(&[hit], &settings, &mut rng).unwrap().frame;
        let clusters = find_clusters(&frame, &ClusterThresholds::default(), settings.noise_sigma_adc);
        // The cluster holding the hit pixel, whatever its class: a noise
        // pixel above threshold next to a split hit makes it 3 pixels long.
        let c = clusters
            .iter()
            .find(|c| c.pixels.iter().any(|p| (p.x, p.y) == (8, 8)))
            .expect("hit reconstructed");
        recovered.push(calibrate(c, &settings.calibration));
    }
    let n = recovered.len() as f64;
    let mean = recovered.iter().sum::<f64>() / n;
    let var = recovered.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sem = (var / n).sqrt();
    assert!((mean - e).abs() < 2.0 * sem, "mean {mean} vs {e} ± {sem}");
}

#[test]
fn smeared_mean_converges() {
    let model = ResolutionModel::default();
    let mut rng = SeedTree::new(45).stream("smear-mean", 0);
    let n = 100_000;
    let e = 8.040;
    let mean = (0..n).map(|_| smear_energy(e, &model, &mut rng).unwrap()).sum::<f64>() / n as f64;
    assert!((mean - e).abs() < 3.0 * model.sigma_at(e) / (n as f64).sqrt(), "{mean}");
}

#[test]
fn resolution_fit_recovers_320_ev() {
    let model = ResolutionModel::default();
    let mut rng = SeedTree::new(46).stream("smear-fit", 0);
    let (lo, width, bins) = (7.4, 0.005, 256);
    let mut hist = vec![0.0; bins];
    for _ in 0..100_000 {
        let x = smear_energy(8.040, &model, &mut rng).unwrap();
        let i = ((x - lo) / width).floor();
        if (0.0..bins as f64).contains(&i) {
            hist[i as usize] += 1.0;
        }
    }
    let xs: Vec<f64> = (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let fit = fit_gaussian(&xs, &hist, 0.05).unwrap();
    assert!((fit.fwhm() * 1e3 - 320.0).abs() < 10.0, "FWHM {} eV", fit.fwhm() * 1e3);
    assert!((fit.mean - 8.040).abs() < 0.003);
}

#[test]
fn frame_dump_round_trip() {
    let settings = FrameSynthesis {
        width: 40,
        height: 24,
        panel_id: 3,
        track_rate: 2.0,
        ..FrameSynthesis::default()
    };
    let mut rng = SeedTree::new(47).stream("dump", 0);
    let mut count_rng = SeedTree::new(47).stream("dump", 1);
    let n = Poisson::new(4.0).unwrap().sample(&mut count_rng) as u32;
    let hits: Vec<Hit> = (0..n).map(|i| Hit { x: 3 * i, y: i, energy_kev: 5.0 }).collect();
    let frame = synthesize_frame(&hits, &settings, &mut rng).unwrap().frame;
    let mut bytes = Vec::new();
    frame.write_binary(&mut bytes).unwrap();
    assert_eq!(bytes.len(), 16 + 2 * 40 * 24);
    assert_eq!(pepsim::ccd::Frame::read_binary(bytes.as_slice()).unwrap(), frame);
    let mut csv = Vec::new();
    frame.write_csv_grid(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("# width=40 height=24 panel_id=3 exposure_min=10\n"));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 24);
    let first: Vec<u16> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, frame.pixels[..40]);
}
