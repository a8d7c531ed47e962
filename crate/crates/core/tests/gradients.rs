//! Analytic gradients against central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavdc_core::agents::{DqnAgent, DqnConfig, Experience, PolicyHead, PpoAgent, PpoConfig, Transition};
use uavdc_core::nn::{Activation, CategoricalHead, GaussianHead, Mlp};

const H: f64 = 1e-5;
const TOL: f64 = 1e-4;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// `f(k, delta)` evaluates the loss with parameter `k` shifted by `delta`.
fn check(name: &str, analytic: &[f64], mut f: impl FnMut(usize, f64) -> f64) {
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let n = (f(k, H) - f(k, -H)) / (2.0 * H);
        let e = rel_err(a, n);
        assert!(e <= TOL, "{name}: param {k} analytic {a} numeric {n} rel err {e}");
        worst = worst.max(e);
    }
    assert!(analytic.iter().any(|g| *g != 0.0), "{name}: gradient identically zero");
    eprintln!("{name}: {} params, worst rel err {worst:.2e}", analytic.len());
}

fn shifted(net: &Mlp<f64>, k: usize, delta: f64) -> Mlp<f64> {
    let mut out = net.clone();
    *out.params_mut().nth(k).unwrap() += delta;
    out
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

#[test]
fn dense_layers_all_activations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for act in [Activation::Tanh, Activation::Relu, Activation::Softplus, Activation::Linear] {
        let mut net = Mlp::<f64>::new(&[4, 6, 5, 3], act, Activation::Linear, 1.0, &mut rng).unwrap();
        let x = random_vec(&mut rng, 4, 1.0);
        let c = random_vec(&mut rng, 3, 1.0);
        net.forward_train(&x).unwrap();
        let grads = net.backward(&c).unwrap();
        let analytic: Vec<f64> = grads.iter().copied().collect();
        check(&format!("mlp {act:?}"), &analytic, |k, d| {
            let out = shifted(&net, k, d).forward(&x).unwrap();
            out.iter().zip(&c).map(|(o, c)| o * c).sum()
        });
    }
}

#[test]
fn nonlinear_output_layer() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut net = Mlp::<f64>::new(&[3, 5, 2], Activation::Tanh, Activation::Softplus, 1.0, &mut rng).unwrap();
    let x = random_vec(&mut rng, 3, 1.0);
    net.forward_train(&x).unwrap();
    let analytic: Vec<f64> = net.backward(&[1.0, -0.5]).unwrap().iter().copied().collect();
    check("softplus output", &analytic, |k, d| {
        let o = shifted(&net, k, d).forward(&x).unwrap();
        o[0] - 0.5 * o[1]
    });
}

#[test]
fn categorical_head() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let head = CategoricalHead { n_actions: 6 };
    for action in [0, 3, 5] {
        let logits = random_vec(&mut rng, 6, 2.0);
        let (_, g) = head.log_prob_grad(&logits, action);
        check("categorical log-prob", &g, |k, d| {
            let mut l = logits.clone();
            l[k] += d;
            head.log_prob(&l, action)
        });
        let (_, g) = head.entropy_grad(&logits);
        check("categorical entropy", &g, |k, d| {
            let mut l = logits.clone();
            l[k] += d;
            head.entropy_grad(&l).0
        });
    }
}

#[test]
fn gaussian_head() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let head = GaussianHead::new(5.0, 5e-3);
    for _ in 0..4 {
        let raw = random_vec(&mut rng, 4, 1.5);
        let action = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let (_, g) = head.log_prob_grad(&raw, action);
        check("gaussian log-prob", &g, |k, d| {
            let mut r = raw.clone();
            r[k] += d;
            head.log_prob(&r, action)
        });
        let (_, g) = PolicyHead::<f64>::entropy_grad(&head, &raw);
        check("gaussian entropy", &g, |k, d| {
            let mut r = raw.clone();
            r[k] += d;
            PolicyHead::<f64>::entropy_grad(&head, &r).0
        });
    }
}

fn ppo_batch<H: PolicyHead<f64>>(
    agent: &PpoAgent<f64, H>,
    rng: &mut ChaCha8Rng,
    dim: usize,
    n: usize,
) -> (Vec<Transition<f64, H::Action>>, Vec<f64>) {
    let mut out = Vec::new();
    for i in 0..n {
        let state = random_vec(rng, dim, 1.0);
        let next_state = random_vec(rng, dim, 1.0);
        let act = agent.act(&state, rng).unwrap();
        // shift the recorded log-prob so some ratios land outside the clip band
        let shift = rng.random_range(-0.4..0.4);
        out.push(Transition {
            state,
            action: act.action,
            reward: rng.random_range(-2.0..1.0),
            next_state,
            done: i % 4 == 3,
            old_value: act.value,
            old_next_value: rng.random_range(-1.0..1.0),
            old_log_prob: act.log_prob + shift,
        });
    }
    let adv = random_vec(rng, n, 2.0);
    (out, adv)
}

fn check_ppo<H: PolicyHead<f64>>(name: &str, mut agent: PpoAgent<f64, H>, dim: usize, rng: &mut ChaCha8Rng) {
    let (batch, adv) = ppo_batch(&agent, rng, dim, 8);
    let refs: Vec<&Transition<f64, H::Action>> = batch.iter().collect();

    let a = agent.actor_loss(&refs, &adv).unwrap();
    let analytic: Vec<f64> = a.grads.iter().copied().collect();
    check(&format!("{name} actor loss"), &analytic, |k, d| {
        let mut ag = agent.clone();
        *ag.actor_mut().params_mut().nth(k).unwrap() += d;
        ag.actor_loss(&refs, &adv).unwrap().loss
    });

    let c = agent.critic_loss(&refs).unwrap();
    let analytic: Vec<f64> = c.grads.iter().copied().collect();
    check(&format!("{name} critic loss"), &analytic, |k, d| {
        let mut ag = agent.clone();
        *ag.critic_mut().params_mut().nth(k).unwrap() += d;
        ag.critic_loss(&refs).unwrap().loss
    });
}

#[test]
fn ppo_losses_discrete() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let cfg = PpoConfig { hidden: vec![7, 5], entropy_coef: 0.05, ..PpoConfig::discrete() };
    let agent = PpoAgent::new(4, CategoricalHead { n_actions: 5 }, cfg, &mut rng).unwrap();
    check_ppo("discrete ppo", agent, 4, &mut rng);
}

#[test]
fn ppo_losses_continuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let cfg = PpoConfig { hidden: vec![6], entropy_coef: 0.05, ..PpoConfig::continuous() };
    let agent = PpoAgent::new(5, GaussianHead::new(5.0, 5e-3), cfg, &mut rng).unwrap();
    check_ppo("continuous ppo", agent, 5, &mut rng);
}

#[test]
fn ppo_actor_loss_without_normalisation() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cfg = PpoConfig { hidden: vec![6], normalize_advantages: false, ..PpoConfig::discrete() };
    let agent = PpoAgent::new(3, CategoricalHead { n_actions: 4 }, cfg, &mut rng).unwrap();
    check_ppo("unnormalised ppo", agent, 3, &mut rng);
}

#[test]
fn dqn_td_loss_plain_and_dueling() {
    for dueling in [false, true] {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let cfg = DqnConfig { hidden: vec![6, 6], dueling, gamma: 0.9, ..DqnConfig::default() };
        let mut agent = DqnAgent::new(4, 5, cfg, &mut rng).unwrap();
        // decouple target from online so both paths carry distinct values
        *agent.online_mut().params_mut().next().unwrap() += 0.3;
        let batch: Vec<Experience<f64>> = (0..6)
            .map(|i| Experience {
                state: random_vec(&mut rng, 4, 1.0),
                action: i % 5,
                reward: rng.random_range(-1.0..1.0),
                next_state: random_vec(&mut rng, 4, 1.0),
                done: i == 2,
            })
            .collect();
        let refs: Vec<&Experience<f64>> = batch.iter().collect();
        let (_, grads) = agent.td_loss(&refs).unwrap();
        let analytic: Vec<f64> = grads.iter().copied().collect();
        check(&format!("dqn dueling={dueling}"), &analytic, |k, d| {
            let mut ag = agent.clone();
            *ag.online_mut().params_mut().nth(k).unwrap() += d;
            ag.td_loss(&refs).unwrap().0
        });
    }
}
