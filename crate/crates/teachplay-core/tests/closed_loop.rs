// Closed-loop contracts on the real simulation: bilateral teaching
// fidelity, motion-copy reproduction, command-stream timing, and the
// speed-nonlinearity gap that motivates replaying against the real
// environment instead of time-rescaling demo data.

use teachplay_core::bilateral::{teach_episode, EpisodeMeta, MotionTrace, Outcome, TickRecord};
use teachplay_core::mocopy::{self, SpeedRatio};
use teachplay_core::rng::Seeded;
use teachplay_core::rollout::trace_success;
use teachplay_core::tasks::{self, TaskKind, Variant};
use teachplay_core::CONTROL_DT;

fn teach(task: TaskKind, variant: Variant, seed: u64) -> MotionTrace {
    let mut rng = Seeded::new(seed);
    let mut leader = tasks::leader_world(task);
    let mut follower = tasks::follower_world(task, variant, &mut rng);
    let op = tasks::operator_model(task, variant);
    let duration = op.duration() * 1.12;
    let meta = EpisodeMeta {
        id: format!("demo-{}-{}", task.name(), variant.name()),
        task,
        variant,
        ratio: 1.0,
        seed,
        outcome: Outcome::Failed,
    };
    teach_episode(&mut leader, &mut follower, &op, duration, meta, &|t| {
        trace_success(task, t)
    })
}

fn play(demo: &MotionTrace, ratio: f64, seed: u64) -> MotionTrace {
    let stream = mocopy::resample_trace(demo, SpeedRatio::new(ratio).unwrap()).unwrap();
    let mut rng = Seeded::new(seed);
    let mut w = tasks::follower_world(demo.meta.task, demo.meta.variant, &mut rng);
    let meta = EpisodeMeta {
        id: format!("pb-{ratio}"),
        task: demo.meta.task,
        variant: demo.meta.variant,
        ratio,
        seed,
        outcome: Outcome::Failed,
    };
    mocopy::playback(&mut w, &stream, meta)
}

/// Per-joint follower-position RMSE between two traces, normalized by the
/// first trace's per-joint motion range.
fn follower_range_rmse(a: &MotionTrace, b: &MotionTrace) -> [f64; 3] {
    let n = a.ticks.len().min(b.ticks.len());
    core::array::from_fn(|j| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in &a.ticks[..n] {
            lo = lo.min(t.follower_res[j].theta);
            hi = hi.max(t.follower_res[j].theta);
        }
        let range = (hi - lo).max(1e-9);
        let mut acc = 0.0;
        for k in 0..n {
            let e = a.ticks[k].follower_res[j].theta - b.ticks[k].follower_res[j].theta;
            acc += e * e;
        }
        (acc / n as f64).sqrt() / range
    })
}

#[test]
fn teaching_tracks_position_and_balances_force() {
    for task in [TaskKind::Pick, TaskKind::Wipe] {
        for variant in Variant::training_set(task) {
            let demo = teach(task, variant, 42);
            assert_eq!(
                demo.meta.outcome,
                Outcome::Success,
                "{}-{} demo failed",
                task.name(),
                variant.name()
            );
            let pos_rms = demo.position_residual_rms();
            assert!(
                pos_rms <= 0.05,
                "{}-{}: position residual rms {pos_rms} rad",
                task.name(),
                variant.name()
            );
            let (force_rms, peak) = demo.force_residual_rms_and_peak();
            assert!(
                force_rms <= 0.10 * peak,
                "{}-{}: force residual rms {force_rms} vs peak {peak}",
                task.name(),
                variant.name()
            );
        }
    }
}

#[test]
fn unit_speed_playback_reproduces_taught_trajectory() {
    for (task, variant) in [(TaskKind::Pick, Variant::Hard), (TaskKind::Wipe, Variant::High)] {
        let demo = teach(task, variant, 42);
        assert_eq!(demo.meta.outcome, Outcome::Success);
        let pb = play(&demo, 1.0, 7);
        assert!(
            trace_success(task, &pb),
            "{}-{} 1x playback failed",
            task.name(),
            variant.name()
        );
        let rmse = follower_range_rmse(&demo, &pb);
        for (j, e) in rmse.iter().enumerate() {
            assert!(
                *e <= 0.05,
                "{}-{} joint {j}: 1x playback RMSE {e} of range",
                task.name(),
                variant.name()
            );
        }
    }
}

#[test]
fn double_speed_stream_halves_duration() {
    let demo = teach(TaskKind::Pick, Variant::Hard, 42);
    let stream = mocopy::resample_trace(&demo, SpeedRatio::new(2.0).unwrap()).unwrap();
    let expect = demo.ticks.len().div_ceil(2);
    assert!(
        (stream.frames.len() as i64 - expect as i64).abs() <= 1,
        "stream {} frames, expected {expect} ± 1",
        stream.frames.len()
    );
    assert!((stream.duration() - 0.5 * demo.duration()).abs() <= 2.0 * CONTROL_DT);
}

#[test]
fn fast_playback_differs_from_time_compressed_demo() {
    // the premise for real-world augmentation: the environment response at
    // speed 2 is not the time-compressed response at speed 1
    let demo = teach(TaskKind::Wipe, Variant::High, 42);
    assert_eq!(demo.meta.outcome, Outcome::Success);
    let real = play(&demo, 2.0, 7);
    let rescaled = mocopy::rescale_trace_full(&demo, SpeedRatio::new(2.0).unwrap()).unwrap();
    let gap = follower_range_rmse(&real, &rescaled);
    let max_gap = gap.iter().cloned().fold(0.0, f64::max);
    assert!(
        max_gap >= 0.05,
        "expected ≥5% range RMSE between real and rescaled response, got {gap:?}"
    );
}

/// Synthetic trace whose leader response is an analytic sinusoid, for
/// checking the resampler against ground truth.
fn sine_trace(n: usize) -> MotionTrace {
    let dt = CONTROL_DT;
    let mut ticks = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dt;
        let mut rec = TickRecord {
            tick: i as u64,
            leader_cmd: Default::default(),
            leader_res: Default::default(),
            follower_cmd: Default::default(),
            follower_res: Default::default(),
            env: Default::default(),
            object_pos: 0.0,
            held: false,
        };
        for j in 0..3 {
            rec.leader_res[j].theta = (2.0 * t + j as f64).sin();
            rec.leader_res[j].omega = 2.0 * (2.0 * t + j as f64).cos();
            rec.leader_res[j].tau = 0.5 * (3.0 * t).sin();
        }
        ticks.push(rec);
    }
    MotionTrace {
        dt,
        meta: EpisodeMeta {
            id: "sine".to_string(),
            task: TaskKind::Pick,
            variant: Variant::Hard,
            ratio: 1.0,
            seed: 0,
            outcome: Outcome::Success,
        },
        ticks,
    }
}

#[test]
fn resampler_matches_analytic_signal() {
    let trace = sine_trace(2500);
    for ratio in [0.5, 1.5, 2.0] {
        let stream = mocopy::resample_trace(&trace, SpeedRatio::new(ratio).unwrap()).unwrap();
        for (k, frame) in stream.frames.iter().enumerate() {
            let t_src = k as f64 * CONTROL_DT * ratio;
            if t_src > (trace.ticks.len() - 1) as f64 * CONTROL_DT {
                break;
            }
            for j in 0..3 {
                let expect_theta = (2.0 * t_src + j as f64).sin();
                // linear interpolation of a sinusoid: O(dt²) error
                assert!(
                    (frame[j].theta - expect_theta).abs() < 5e-6,
                    "ratio {ratio}, frame {k}, joint {j}"
                );
                let expect_omega = ratio * 2.0 * (2.0 * t_src + j as f64).cos();
                assert!(
                    (frame[j].omega - expect_omega).abs() < ratio * 5e-6,
                    "ratio {ratio}, frame {k}, joint {j} omega"
                );
            }
        }
    }
}

#[test]
fn unit_ratio_resample_is_identity_on_commands() {
    let trace = sine_trace(500);
    let stream = mocopy::resample_trace(&trace, SpeedRatio::new(1.0).unwrap()).unwrap();
    assert_eq!(stream.frames.len(), trace.ticks.len());
    for (frame, tick) in stream.frames.iter().zip(trace.ticks.iter()) {
        for j in 0..3 {
            assert_eq!(frame[j].theta, tick.leader_res[j].theta);
            assert_eq!(frame[j].omega, tick.leader_res[j].omega);
            assert_eq!(frame[j].tau, tick.leader_res[j].tau);
        }
    }
}
