//! Primal network simplex on the transportation graph
//!
//! ```text
//! point j --(c_ij, ∞)--> cluster i --(0, κ⁺_i − κ⁻_i)--> sink
//! ```
//!
//! with supplies `ω_j`, demands `κ⁻_i` at clusters and the remainder at the sink.
//! The start basis hangs every node off an artificial root; the leaving arc is
//! chosen so the tree stays strongly feasible, which rules out cycling.

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    Tree,
    Lower,
    Upper,
}

/// A transportation instance in `f64`, costs stored row-major `k×n`.
pub(crate) struct Transport<'a> {
    pub k: usize,
    pub n: usize,
    pub cost: &'a [f64],
    pub supply: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

/// Optimal flows and node potentials, both free of artificial-arc scaling.
pub(crate) struct FlowSolution {
    /// `y_ij`, row-major `k×n`.
    pub flow: Vec<f64>,
    /// Flow on cluster→sink arcs, i.e. `ω(C_i) − κ⁻_i`.
    pub slack: Vec<f64>,
    /// Potentials from the final basis, nodes `0..n+k+1` (points, clusters, sink).
    pub basis_potential: Vec<f64>,
    pub pivots: usize,
    pub snap: f64,
    pub cost_scale: f64,
}

#[derive(Debug)]
pub(crate) enum SimplexError {
    Infeasible,
    IterationLimit(usize),
    Unbounded,
}

struct Net {
    src: Vec<usize>,
    tgt: Vec<usize>,
    cost: Vec<f64>,
    cap: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<State>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    up: Vec<bool>,
    depth: Vec<usize>,
    pot: Vec<f64>,
    first_child: Vec<usize>,
    next_sib: Vec<usize>,
    prev_sib: Vec<usize>,
}

impl Net {
    #[inline]
    fn rc(&self, a: usize) -> f64 {
        self.cost[a] + self.pot[self.src[a]] - self.pot[self.tgt[a]]
    }

    fn detach(&mut self, v: usize) {
        let p = self.parent[v];
        let (prev, next) = (self.prev_sib[v], self.next_sib[v]);
        if prev == NONE {
            self.first_child[p] = next;
        } else {
            self.next_sib[prev] = next;
        }
        if next != NONE {
            self.prev_sib[next] = prev;
        }
        self.prev_sib[v] = NONE;
        self.next_sib[v] = NONE;
    }

    fn attach(&mut self, v: usize, p: usize) {
        self.parent[v] = p;
        let head = self.first_child[p];
        self.next_sib[v] = head;
        self.prev_sib[v] = NONE;
        if head != NONE {
            self.prev_sib[head] = v;
        }
        self.first_child[p] = v;
    }

    fn refresh_subtree(&mut self, top: usize, stack: &mut Vec<usize>) {
        stack.clear();
        stack.push(top);
        while let Some(w) = stack.pop() {
            let p = self.parent[w];
            let a = self.pred[w];
            self.depth[w] = self.depth[p] + 1;
            self.pot[w] = if self.up[w] {
                self.pot[p] - self.cost[a]
            } else {
                self.pot[p] + self.cost[a]
            };
            let mut c = self.first_child[w];
            while c != NONE {
                stack.push(c);
                c = self.next_sib[c];
            }
        }
    }
}

impl Transport<'_> {
    fn point_arc(&self, j: usize, i: usize) -> usize {
        j * self.k + i
    }

    pub(crate) fn solve(&self) -> Result<FlowSolution, SimplexError> {
        let (n, k) = (self.n, self.k);
        let sink = n + k;
        let root = n + k + 1;
        let nodes = n + k + 2;
        let real = n * k + k;
        let arcs = real + nodes - 1;

        let total: f64 = self.supply.iter().sum();
        let sum_lower: f64 = self.lower.iter().sum();
        let cmax = self.cost.iter().fold(0.0f64, |m, &c| m.max(c));
        let big_m = (nodes as f64 + 1.0) * cmax.max(1.0) + 1.0;
        let snap = 1e-13 * total.max(1e-300);
        let eps_rc = 1e-14 * big_m;

        let mut net = Net {
            src: Vec::with_capacity(arcs),
            tgt: Vec::with_capacity(arcs),
            cost: Vec::with_capacity(arcs),
            cap: Vec::with_capacity(arcs),
            flow: vec![0.0; arcs],
            state: vec![State::Lower; arcs],
            parent: vec![NONE; nodes],
            pred: vec![NONE; nodes],
            up: vec![false; nodes],
            depth: vec![0; nodes],
            pot: vec![0.0; nodes],
            first_child: vec![NONE; nodes],
            next_sib: vec![NONE; nodes],
            prev_sib: vec![NONE; nodes],
        };
        for j in 0..n {
            for i in 0..k {
                net.src.push(j);
                net.tgt.push(n + i);
                net.cost.push(self.cost[i * n + j]);
                net.cap.push(f64::INFINITY);
            }
        }
        for i in 0..k {
            net.src.push(n + i);
            net.tgt.push(sink);
            net.cost.push(0.0);
            let width = self.upper[i] - self.lower[i];
            net.cap.push(if width.is_finite() {
                width.max(0.0)
            } else {
                f64::INFINITY
            });
        }
        let mut supply = Vec::with_capacity(nodes - 1);
        supply.extend_from_slice(self.supply);
        supply.extend(self.lower.iter().map(|l| -l));
        supply.push(sum_lower - total);
        for (v, &b) in supply.iter().enumerate() {
            let a = real + v;
            net.cost.push(big_m);
            net.cap.push(f64::INFINITY);
            if b >= 0.0 {
                net.src.push(v);
                net.tgt.push(root);
                net.flow[a] = b;
                net.up[v] = true;
                net.pot[v] = -big_m;
            } else {
                net.src.push(root);
                net.tgt.push(v);
                net.flow[a] = -b;
                net.up[v] = false;
                net.pot[v] = big_m;
            }
            net.state[a] = State::Tree;
            net.pred[v] = a;
            net.depth[v] = 1;
            net.attach(v, root);
        }

        let block = ((real as f64).sqrt().ceil() as usize).max(10).min(real);
        let max_pivots = 200 * (nodes + real) + 10_000;
        let mut next_arc = 0usize;
        let mut pivots = 0usize;
        let mut path = Vec::new();
        let mut stack = Vec::new();

        loop {
            // block search pricing
            let mut entering = NONE;
            let mut best = eps_rc;
            let mut seen = 0usize;
            for step in 0..real {
                let a = (next_arc + step) % real;
                let v = match net.state[a] {
                    State::Lower => -net.rc(a),
                    State::Upper => net.rc(a),
                    State::Tree => 0.0,
                };
                if v > best {
                    best = v;
                    entering = a;
                }
                seen += 1;
                if seen == block {
                    if entering != NONE {
                        next_arc = (a + 1) % real;
                        break;
                    }
                    seen = 0;
                }
            }
            if entering == NONE {
                break;
            }
            pivots += 1;
            if pivots > max_pivots {
                return Err(SimplexError::IterationLimit(pivots));
            }

            let e = entering;
            let lower_state = net.state[e] == State::Lower;
            let (first, second) = if lower_state {
                (net.src[e], net.tgt[e])
            } else {
                (net.tgt[e], net.src[e])
            };
            let (mut u, mut v) = (first, second);
            while u != v {
                if net.depth[u] > net.depth[v] {
                    u = net.parent[u];
                } else if net.depth[v] > net.depth[u] {
                    v = net.parent[v];
                } else {
                    u = net.parent[u];
                    v = net.parent[v];
                }
            }
            let join = u;

            let mut delta = if lower_state {
                net.cap[e] - net.flow[e]
            } else {
                net.flow[e]
            };
            let mut side = 0u8;
            let mut u_out = NONE;
            let mut w = first;
            while w != join {
                let a = net.pred[w];
                let d = if net.up[w] {
                    net.flow[a]
                } else {
                    net.cap[a] - net.flow[a]
                };
                if d < delta {
                    delta = d;
                    u_out = w;
                    side = 1;
                }
                w = net.parent[w];
            }
            w = second;
            while w != join {
                let a = net.pred[w];
                let d = if net.up[w] {
                    net.cap[a] - net.flow[a]
                } else {
                    net.flow[a]
                };
                if d <= delta {
                    delta = d;
                    u_out = w;
                    side = 2;
                }
                w = net.parent[w];
            }
            if !delta.is_finite() {
                return Err(SimplexError::Unbounded);
            }

            if delta > 0.0 {
                let snap_to = |f: f64, cap: f64| -> f64 {
                    if f < snap {
                        0.0
                    } else if cap.is_finite() && cap - f < snap {
                        cap
                    } else {
                        f
                    }
                };
                net.flow[e] += if lower_state { delta } else { -delta };
                net.flow[e] = snap_to(net.flow[e], net.cap[e]);
                let mut w = first;
                while w != join {
                    let a = net.pred[w];
                    net.flow[a] += if net.up[w] { -delta } else { delta };
                    net.flow[a] = snap_to(net.flow[a], net.cap[a]);
                    w = net.parent[w];
                }
                w = second;
                while w != join {
                    let a = net.pred[w];
                    net.flow[a] += if net.up[w] { delta } else { -delta };
                    net.flow[a] = snap_to(net.flow[a], net.cap[a]);
                    w = net.parent[w];
                }
            }

            if side == 0 {
                net.state[e] = if lower_state {
                    State::Upper
                } else {
                    State::Lower
                };
                net.flow[e] = if lower_state { net.cap[e] } else { 0.0 };
                continue;
            }

            let a_out = net.pred[u_out];
            let emptied = (side == 1) == net.up[u_out];
            if emptied {
                net.state[a_out] = State::Lower;
                net.flow[a_out] = 0.0;
            } else {
                net.state[a_out] = State::Upper;
                net.flow[a_out] = net.cap[a_out];
            }
            net.state[e] = State::Tree;

            let (u_in, v_in) = if side == 1 {
                (first, second)
            } else {
                (second, first)
            };
            path.clear();
            let mut w = u_in;
            loop {
                path.push((w, net.pred[w], net.up[w]));
                if w == u_out {
                    break;
                }
                w = net.parent[w];
            }
            for &(node, _, _) in &path {
                net.detach(node);
            }
            net.pred[u_in] = e;
            net.up[u_in] = net.src[e] == u_in;
            net.attach(u_in, v_in);
            for t in 0..path.len() - 1 {
                let (child, arc, was_up) = path[t];
                let node = path[t + 1].0;
                net.pred[node] = arc;
                net.up[node] = !was_up;
                net.attach(node, child);
            }
            net.refresh_subtree(u_in, &mut stack);
        }

        let art_flow = (real..arcs).map(|a| net.flow[a]).fold(0.0f64, f64::max);
        if art_flow > 1e-9 * total.max(1.0) {
            return Err(SimplexError::Infeasible);
        }

        let mut flow = vec![0.0; k * n];
        for j in 0..n {
            for i in 0..k {
                flow[i * n + j] = net.flow[self.point_arc(j, i)];
            }
        }
        let slack = (0..k).map(|i| net.flow[n * k + i]).collect();
        let shift = net.pot[sink];
        let basis_potential = net.pot[..nodes - 1].iter().map(|p| p - shift).collect();
        Ok(FlowSolution {
            flow,
            slack,
            basis_potential,
            pivots,
            snap,
            cost_scale: cmax,
        })
    }

    /// Node potentials (points, clusters, sink; sink pinned to 0) that are
    /// complementary to `sol`, with reduced cost at least `margin` on every
    /// unused point→cluster arc. `None` when no such potentials exist.
    pub(crate) fn potentials(&self, sol: &FlowSolution, margin: f64) -> Option<Vec<f64>> {
        let (n, k) = (self.n, self.k);
        let sink = n + k;
        let nodes = n + k + 1;
        let snap = sol.snap.max(1e-12 * self.supply.iter().sum::<f64>());
        let tol = 1e-12 * (1.0 + sol.cost_scale);

        // (src, tgt, cost, kind) with kind: 0 equality, 1 lower with margin, 2 lower, 3 upper
        let mut eq_adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes];
        let mut ineq: Vec<(usize, usize, f64, f64)> = Vec::new();
        for i in 0..k {
            for j in 0..n {
                let c = self.cost[i * n + j];
                let f = sol.flow[i * n + j];
                if f > snap {
                    eq_adj[j].push((n + i, c));
                    eq_adj[n + i].push((j, -c));
                } else {
                    ineq.push((j, n + i, c, margin));
                }
            }
        }
        for i in 0..k {
            let width = self.upper[i] - self.lower[i];
            let cap = if width.is_finite() {
                width.max(0.0)
            } else {
                f64::INFINITY
            };
            let f = sol.slack[i];
            if cap <= snap {
                continue;
            }
            let at_lower = f <= snap;
            let at_upper = cap.is_finite() && cap - f <= snap;
            if at_lower {
                ineq.push((n + i, sink, 0.0, 0.0));
            } else if at_upper {
                // rc ≤ 0  ⇔  reversed arc with rc ≥ 0
                ineq.push((sink, n + i, 0.0, 0.0));
            } else {
                eq_adj[n + i].push((sink, 0.0));
                eq_adj[sink].push((n + i, 0.0));
            }
        }

        // q_t = q_s + c along equality arcs (rc = c + q_s − q_t = 0)
        let mut comp = vec![NONE; nodes];
        let mut q = vec![0.0; nodes];
        let mut ncomp = 0;
        let mut stack = Vec::new();
        let order = std::iter::once(sink).chain(0..nodes);
        for start in order {
            if comp[start] != NONE {
                continue;
            }
            comp[start] = ncomp;
            q[start] = 0.0;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(w, c) in &eq_adj[v] {
                    if comp[w] == NONE {
                        comp[w] = ncomp;
                        q[w] = q[v] + c;
                        stack.push(w);
                    } else if (q[w] - q[v] - c).abs() > 1e-9 * (1.0 + sol.cost_scale) {
                        return None;
                    }
                }
            }
            ncomp += 1;
        }

        // K_t ≤ K_s + w, w = c + q_s − q_t − m
        let mut edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncomp];
        for &(s, t, c, m) in &ineq {
            let w = c + q[s] - q[t] - m;
            let (cs, ct) = (comp[s], comp[t]);
            if cs == ct {
                if w < -tol {
                    return None;
                }
            } else {
                edges[cs].push((ct, w));
            }
        }
        let mut kk = vec![0.0f64; ncomp];
        let mut in_queue = vec![true; ncomp];
        let mut count = vec![0usize; ncomp];
        let mut queue: std::collections::VecDeque<usize> = (0..ncomp).collect();
        while let Some(v) = queue.pop_front() {
            in_queue[v] = false;
            for &(t, w) in &edges[v] {
                if kk[t] > kk[v] + w + tol {
                    kk[t] = kk[v] + w;
                    if !in_queue[t] {
                        count[t] += 1;
                        if count[t] > ncomp + 1 {
                            return None;
                        }
                        in_queue[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        let shift = q[sink] + kk[comp[sink]];
        Some((0..nodes).map(|v| q[v] + kk[comp[v]] - shift).collect())
    }
}
