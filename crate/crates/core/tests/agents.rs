//! PPO objective invariants and the DQN two-state chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavdc_core::agents::{DqnAgent, DqnConfig, Experience, PpoAgent, PpoConfig, Transition};
use uavdc_core::nn::{Activation, CategoricalHead, GaussianHead};

fn states(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

#[test]
fn ratio_is_one_at_snapshot() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = PpoAgent::new(4, CategoricalHead { n_actions: 7 }, PpoConfig::discrete(), &mut rng).unwrap();
    let c = PpoAgent::new(4, GaussianHead::new(5.0, 5e-3), PpoConfig::continuous(), &mut rng).unwrap();
    for s in states(&mut rng, 50, 4) {
        let a = d.act(&s, &mut rng).unwrap();
        let rho = (d.log_prob(&s, &a.action).unwrap() - a.log_prob).exp();
        assert!((rho - 1.0).abs() <= 1e-12);
        let a = c.act(&s, &mut rng).unwrap();
        let rho = (c.log_prob(&s, &a.action).unwrap() - a.log_prob).exp();
        assert!((rho - 1.0).abs() <= 1e-12);
    }
}

fn one_step(state: Vec<f64>, action: usize, old_log_prob: f64) -> Transition<f64, usize> {
    Transition {
        state: state.clone(),
        action,
        reward: 0.0,
        next_state: state,
        done: false,
        old_value: 0.0,
        old_next_value: 0.0,
        old_log_prob,
    }
}

#[test]
fn clipped_region_has_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = PpoConfig { entropy_coef: 0.0, normalize_advantages: false, hidden: vec![8], ..PpoConfig::discrete() };
    let mut agent = PpoAgent::new(3, CategoricalHead { n_actions: 4 }, cfg, &mut rng).unwrap();
    let s = vec![0.2, -0.4, 0.9];
    let logp = agent.log_prob(&s, &2).unwrap();

    // ratio = e^0.5 > 1 + clip with a positive advantage: clipped branch is active
    let hi = one_step(s.clone(), 2, logp - 0.5);
    let g = agent.actor_loss(&[&hi], &[1.0]).unwrap();
    assert!(g.grads.is_zero());
    assert!((g.loss + 1.2).abs() < 1e-12);

    // ratio = e^-0.5 < 1 - clip with a negative advantage
    let lo = one_step(s.clone(), 2, logp + 0.5);
    let g = agent.actor_loss(&[&lo], &[-1.0]).unwrap();
    assert!(g.grads.is_zero());
    assert!((g.loss - 0.8).abs() < 1e-12);

    // the unclipped side of the same ratios still carries gradient
    assert!(!agent.actor_loss(&[&hi], &[-1.0]).unwrap().grads.is_zero());
    assert!(!agent.actor_loss(&[&lo], &[1.0]).unwrap().grads.is_zero());
    let inside = one_step(s, 2, logp);
    assert!(!agent.actor_loss(&[&inside], &[1.0]).unwrap().grads.is_zero());
}

#[test]
fn critic_target_is_frozen() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = PpoConfig { hidden: vec![8], ..PpoConfig::discrete() };
    let mut agent = PpoAgent::new(3, CategoricalHead { n_actions: 3 }, cfg, &mut rng).unwrap();
    let batch: Vec<Transition<f64, usize>> = states(&mut rng, 6, 3)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut t = one_step(s, i % 3, 0.0);
            t.reward = i as f64 * 0.3 - 1.0;
            t.next_state = vec![0.5, 0.5, -0.5];
            t.old_next_value = agent.old_value(&t.next_state).unwrap();
            t
        })
        .collect();
    let refs: Vec<&Transition<f64, usize>> = batch.iter().collect();

    // Gradient equals the pure regression gradient 2(v - y)/n dv/dphi with y fixed.
    let mut expected = None;
    for t in &refs {
        let mut net = agent.critic().clone();
        let v = net.forward_train(&t.state).unwrap()[0];
        let g = net.backward(&[2.0 * (v - t.td_target(0.99)) / 6.0]).unwrap();
        match expected.as_mut() {
            None => expected = Some(g),
            Some(acc) => acc.add_assign(&g),
        }
    }
    let got = agent.critic_loss(&refs).unwrap().grads;
    for (a, b) in got.iter().zip(expected.unwrap().iter()) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    // Training the live critic leaves the snapshot, and so every stored target, untouched.
    let before = agent.old_critic().clone();
    let targets: Vec<f64> = refs.iter().map(|t| t.td_target(0.99)).collect();
    for _ in 0..20 {
        agent.update_batch(&refs, &[0.1, -0.2, 0.3, 0.0, 0.5, -0.1]).unwrap();
    }
    assert_eq!(agent.old_critic(), &before);
    assert_ne!(agent.critic(), &before);
    assert_eq!(refs.iter().map(|t| t.td_target(0.99)).collect::<Vec<_>>(), targets);
    assert_eq!(agent.old_value(&[0.5, 0.5, -0.5]).unwrap(), batch[0].old_next_value);
    agent.sync_snapshots();
    assert_eq!(agent.old_critic(), agent.critic());
}

/// Chain with states {0, 1}: action 0 stays, action 1 switches.
/// Rewards: switching out of 0 pays 1, staying in 1 pays 2.
fn chain(s: usize, a: usize) -> (usize, f64) {
    match (s, a) {
        (0, 0) => (0, 0.0),
        (0, _) => (1, 1.0),
        (1, 0) => (1, 2.0),
        _ => (0, 0.0),
    }
}

fn value_iteration(gamma: f64) -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..2000 {
        let mut next = q;
        for (s, row) in next.iter_mut().enumerate() {
            for (a, v) in row.iter_mut().enumerate() {
                let (s2, r) = chain(s, a);
                *v = r + gamma * q[s2][0].max(q[s2][1]);
            }
        }
        q = next;
    }
    q
}

fn one_hot(s: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2];
    v[s] = 1.0;
    v
}

#[test]
fn dqn_matches_value_iteration_on_chain() {
    let gamma = 0.5;
    let q_star = value_iteration(gamma);
    // hand solution: Q(1,0) = 4, Q(0,1) = 3, Q(0,0) = Q(1,1) = 1.5
    assert!((q_star[1][0] - 4.0).abs() < 1e-12 && (q_star[0][1] - 3.0).abs() < 1e-12);
    assert!((q_star[0][0] - 1.5).abs() < 1e-12 && (q_star[1][1] - 1.5).abs() < 1e-12);

    for dueling in [false, true] {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = DqnConfig {
            gamma,
            lr: 1e-2,
            batch_size: 16,
            buffer_capacity: 64,
            warmup: 16,
            sync_period: 20,
            train_every: 1,
            hidden: vec![16],
            activation: Activation::Tanh,
            dueling,
            max_grad_norm: None,
        };
        let mut agent = DqnAgent::new(2, 2, cfg, &mut rng).unwrap();
        for _ in 0..16 {
            for s in 0..2 {
                for a in 0..2 {
                    let (s2, r) = chain(s, a);
                    agent.observe(Experience { state: one_hot(s), action: a, reward: r, next_state: one_hot(s2), done: false });
                }
            }
        }
        for i in 0..6000 {
            if i == 3000 {
                agent.set_learning_rate(1e-3);
            }
            agent.update(&mut rng).unwrap();
        }
        for s in 0..2 {
            let q = agent.q_values(&one_hot(s)).unwrap();
            for a in 0..2 {
                assert!(
                    (q[a] - q_star[s][a]).abs() < 1e-2,
                    "dueling={dueling} Q({s},{a}) = {} want {}",
                    q[a],
                    q_star[s][a]
                );
            }
        }
        assert_eq!(agent.act_greedy(&one_hot(0)).unwrap(), 1);
        assert_eq!(agent.act_greedy(&one_hot(1)).unwrap(), 0);
    }
}
