mod common;

use std::time::Instant;

use roco_core::corpus;
use roco_core::exec::{ExecRequest, HeuristicRunner};
use roco_core::heuristic::{ArgValue, Failure};
use roco_core::matrix::Matrix;

fn triangle() -> Matrix {
    Matrix::from_rows(&[vec![0.0, 3.0, 4.0], vec![3.0, 0.0, 5.0], vec![4.0, 5.0, 0.0]]).unwrap()
}

fn request(entry: &str, source: &str, args: Vec<ArgValue>, timeout_s: f64) -> ExecRequest {
    ExecRequest {
        entry: entry.into(),
        source: source.into(),
        args,
        timeout_s,
    }
}

/// Hand evaluation of the white-box TSP corpus formula on the 3-4-5 triangle,
/// in the same floating-point operation order as the source.
fn hand_triangle() -> [[f64; 3]; 3] {
    // nearer-row counts: row 0 -> (1, 1), row 1 -> (2, 1), row 2 -> (2, 2)
    let a01 = (1.0 / 27.0) / 3.0;
    let a02 = (1.0 / 64.0) / 3.0;
    let a10 = (1.0 / 27.0) / 4.0;
    let a12 = (1.0 / 125.0) / 3.0;
    let a20 = (1.0 / 64.0) / 4.0;
    let a21 = (1.0 / 125.0) / 4.0;
    let s0 = 0.0 + a01 + a02;
    let s1 = a10 + 0.0 + a12;
    let s2 = a20 + a21 + 0.0;
    [
        [0.0 / s0, a01 / s0, a02 / s0],
        [a10 / s1, 0.0 / s1, a12 / s1],
        [a20 / s2, a21 / s2, 0.0 / s2],
    ]
}

#[test]
fn white_box_tsp_heuristic_matches_hand_values_bitwise() {
    let entry = corpus::by_name("tsp-white").unwrap();
    let mut pool = common::pool(1);
    let got = pool
        .run(&request("heuristics_v2", entry.source, vec![ArgValue::Matrix(triangle())], 10.0))
        .unwrap();
    let m = got.value.as_matrix().expect("matrix output").clone();
    let want = hand_triangle();
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            assert_eq!(m[(i, j)].to_bits(), w.to_bits(), "entry ({i}, {j})");
        }
        let sum: f64 = m.row(i).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
    let native = entry.evaluate(&[ArgValue::Matrix(triangle())]).unwrap();
    let n = native.as_matrix().unwrap();
    for (a, b) in n.as_slice().iter().zip(m.as_slice()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn typed_failures() {
    let mut pool = common::pool(1);
    let scalar = || vec![ArgValue::Scalar(1.0)];
    let missing = pool.run(&request("g", "def f(x):\n    return x\n", scalar(), 5.0));
    assert!(matches!(missing, Err(Failure::Exception(m)) if m.contains("no function named g")));
    let raised = pool.run(&request("f", "def f(x):\n    raise ValueError('bad')\n", scalar(), 5.0));
    assert!(matches!(raised, Err(Failure::Exception(m)) if m.contains("ValueError: bad")));
    let nan = pool.run(&request("f", "def f(x):\n    return np.full(3, np.nan)\n", scalar(), 5.0));
    assert_eq!(nan, Err(Failure::NonFinite));
    let cube = pool.run(&request("f", "def f(x):\n    return np.zeros((2, 2, 2))\n", scalar(), 5.0));
    assert!(matches!(cube, Err(Failure::Shape(_))));
    let ok = pool.run(&request("f", "def f(v):\n    return v * 2\n", vec![ArgValue::Vector(vec![1.0, 2.5, -3.0])], 5.0));
    assert_eq!(ok.unwrap().value, ArgValue::Vector(vec![2.0, 5.0, -6.0]));
    assert_eq!(pool.respawns(), 0);
}

#[test]
fn infinite_loop_times_out_within_twice_the_limit() {
    let mut pool = common::pool(1);
    let start = Instant::now();
    let r = pool.run(&request("f", "def f(x):\n    while True:\n        pass\n", vec![ArgValue::Scalar(0.0)], 1.0));
    let wall = start.elapsed().as_secs_f64();
    assert_eq!(r, Err(Failure::Timeout));
    assert!(wall < 2.0, "answered after {wall:.3}s");
    assert_eq!(pool.respawns(), 0);
}

#[test]
fn unresponsive_worker_is_killed_and_replaced() {
    let mut pool = common::pool(1);
    let src = "import signal\ndef f(x):\n    signal.signal(signal.SIGALRM, signal.SIG_IGN)\n    while True:\n        pass\n";
    let start = Instant::now();
    let r = pool.run(&request("f", src, vec![ArgValue::Scalar(0.0)], 1.0));
    assert_eq!(r, Err(Failure::Timeout));
    assert!(start.elapsed().as_secs_f64() < 2.0);
    assert_eq!(pool.respawns(), 1);
    let ok = pool.run(&request("f", "def f(x):\n    return x + 1\n", vec![ArgValue::Scalar(1.0)], 5.0));
    assert_eq!(ok.unwrap().value, ArgValue::Scalar(2.0));
}

#[test]
fn poisoning_sources_leave_no_trace() {
    let mut pool = common::pool(1);
    let poison = [
        "import math\nmath.pi = 3.0\ndef f(x):\n    return x\n",
        "np.zeros = None\ndef f(x):\n    return x\n",
        "import builtins\nbuiltins.len = lambda v: 0\ndef f(x):\n    return x\n",
        "LEAK = 99\ndef f(x):\n    global STATE\n    STATE = 1\n    return x\n",
        "np.LEAK = 7\ndef f(x):\n    return x\n",
    ];
    let probe = "def f(x):\n    held = [name for name in ('LEAK', 'STATE') if name in globals()]\n    \
                 assert not held and not hasattr(np, 'LEAK')\n    \
                 return np.zeros(3) + math.pi + len([1, 2])\n";
    let want = ArgValue::Vector(vec![std::f64::consts::PI + 2.0; 3]);
    for i in 0..100 {
        let src = if i % 2 == 0 { poison[(i / 2) % poison.len()] } else { probe };
        let r = pool.run(&request("f", src, vec![ArgValue::Scalar(0.0)], 5.0)).unwrap();
        if i % 2 == 1 {
            assert_eq!(r.value, want, "request {i}");
        }
    }
}

#[test]
fn batches_keep_request_order_across_workers() {
    let mut pool = common::pool(3);
    let reqs: Vec<ExecRequest> = (0..12)
        .map(|i| request("f", &format!("def f(x):\n    return x + {i}\n"), vec![ArgValue::Scalar(0.5)], 5.0))
        .collect();
    let out = pool.run_batch(&reqs);
    for (i, r) in out.into_iter().enumerate() {
        assert_eq!(r.unwrap().value, ArgValue::Scalar(0.5 + i as f64));
    }
}
