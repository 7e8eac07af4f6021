"""Extractive summarization as an episodic MDP with pluggable terminal
rewards, trained by linear TD(0), plus a self-contained ROUGE-1/2/L
evaluator.

The episode adds one source sentence at a time; actions that would exceed
the word budget are masked, so every reachable state is a valid summary.
Only the terminal reward depends on the configured metric -- transition
dynamics never do.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embed import build_idf
from .errors import BudgetError, DegenerateInputError, TrainingError, ValidationError
from .pseudoref import StrategySpec, build
from .scorers import WORST_WMD_SCORE, make_bag, wmd_cost, score_js

DEFAULT_BUDGET = 100


@dataclass(frozen=True)
class ExtractState:
    selected: tuple             # of (doc_id, sent_idx), selection order
    word_count: int
    terminal: bool


@dataclass(frozen=True)
class RewardSpec:
    kind: str                   # "supert" | "js"
    strategy: StrategySpec = field(default_factory=lambda: StrategySpec(kind="top_n", n=10))
    use_idf: bool = True
    mode: str = "auto"

    def validate(self):
        if self.kind not in ("supert", "js"):
            raise ValidationError(f"unknown reward kind {self.kind!r}")
        self.strategy.validate()
        return self


@dataclass
class ValueFunction:
    weights: np.ndarray
    learning_rate: float
    epsilon: float              # final epsilon of the behavior schedule
    embedding_dim: int
    budget: int

    def value(self, features: np.ndarray) -> float:
        return float(np.dot(self.weights, features))


def _sentence_lookup(topic) -> dict:
    table = {}
    for doc in topic.documents:
        for sent in doc.sentences:
            table[(doc.doc_id, sent.sent_idx)] = sent
    return table


def _fits(topic, state: ExtractState, budget: int) -> list:
    """Unselected sentences that still fit, in (document, position) order."""
    chosen = set(state.selected)
    room = budget - state.word_count
    actions = []
    for doc in topic.documents:
        for sent in doc.sentences:
            key = (doc.doc_id, sent.sent_idx)
            if key not in chosen and sent.word_count <= room:
                actions.append(key)
    return actions


def initial_state(topic, budget: int = DEFAULT_BUDGET) -> ExtractState:
    state = ExtractState(selected=(), word_count=0, terminal=False)
    if not _fits(topic, state, budget):
        state = ExtractState(selected=(), word_count=0, terminal=True)
    return state


def legal_actions(state: ExtractState, topic, budget: int = DEFAULT_BUDGET) -> list:
    if state.terminal:
        return []
    return _fits(topic, state, budget)


def step(state: ExtractState, action, topic, budget: int = DEFAULT_BUDGET) -> ExtractState:
    if state.terminal:
        raise ValidationError("cannot act in a terminal state")
    if action in state.selected:
        raise ValidationError(f"sentence {action} already selected")
    sent = _sentence_lookup(topic).get(action)
    if sent is None:
        raise ValidationError(f"unknown sentence {action}")
    new_count = state.word_count + sent.word_count
    if new_count > budget:
        raise BudgetError(
            f"selecting {action} ({sent.word_count} words) would exceed the "
            f"{budget}-word budget at {state.word_count} words"
        )
    new_state = ExtractState(
        selected=state.selected + (action,), word_count=new_count, terminal=False
    )
    if not _fits(topic, new_state, budget):
        new_state = ExtractState(
            selected=new_state.selected, word_count=new_count, terminal=True
        )
    return new_state


def selected_sentences(state: ExtractState, topic) -> list:
    """Resolve picks in document order (the assembled summary order)."""
    order = {d.doc_id: i for i, d in enumerate(topic.documents)}
    table = _sentence_lookup(topic)
    keys = sorted(state.selected, key=lambda p: (order[p[0]], p[1]))
    return [(topic.topic_id, doc_id, table[(doc_id, sent_idx)])
            for doc_id, sent_idx in keys]


def summary_text(state: ExtractState, topic) -> str:
    return " ".join(sent.raw_text for _, _, sent in selected_sentences(state, topic))


class TerminalReward:
    """Reward callable for one topic; reference material is prepared once."""

    def __init__(self, topic, spec: RewardSpec, backend=None):
        spec.validate()
        self.topic = topic
        self.spec = spec
        self.backend = backend
        self._reference = None
        self._idf = None
        if spec.kind == "supert":
            if backend is None:
                raise ValidationError("supert reward needs an embedding backend")
            self._idf = build_idf(topic) if spec.use_idf else None
            pseudo = build(topic, spec.strategy, backend)
            try:
                self._reference = make_bag(pseudo.sentences(topic), backend, self._idf)
            except DegenerateInputError:
                self._reference = None

    def __call__(self, state: ExtractState) -> float:
        sentences = selected_sentences(state, self.topic)
        if self.spec.kind == "supert":
            if self._reference is None:
                return WORST_WMD_SCORE
            try:
                bag = make_bag(sentences, self.backend, self._idf)
            except DegenerateInputError:
                return WORST_WMD_SCORE
            return -wmd_cost(self._reference, bag, self.spec.mode)
        records = [sent for _, _, sent in sentences]
        return score_js(_SentenceHolder(records), self.topic)


@dataclass(frozen=True)
class _SentenceHolder:
    sentences: list


def terminal_reward(state: ExtractState, topic, spec: RewardSpec, backend=None) -> float:
    if not state.terminal:
        raise ValidationError("terminal_reward called on a non-terminal state")
    return TerminalReward(topic, spec, backend)(state)


class FeatureMap:
    """State features: mean sentence embedding of the picks, coverage
    statistics (document coverage, selected fraction, mean relative
    position), length ratio, and a bias term."""

    EXTRA = 5

    def __init__(self, topic, backend, budget: int = DEFAULT_BUDGET):
        self.topic = topic
        self.budget = budget
        self.embedding_dim = backend.dimension
        self.n_docs = len(topic.documents)
        self.n_sentences = topic.source_sentence_count()
        self._embeddings = {}
        self._positions = {}
        for doc in topic.documents:
            doc_len = max(1, len(doc.sentences))
            for sent in doc.sentences:
                key = (doc.doc_id, sent.sent_idx)
                vec = backend.sentence_vector(topic.topic_id, doc.doc_id, sent)
                self._embeddings[key] = (
                    vec if vec is not None else np.zeros(self.embedding_dim)
                )
                self._positions[key] = sent.sent_idx / doc_len

    @property
    def dimension(self) -> int:
        return self.embedding_dim + self.EXTRA

    def features(self, state: ExtractState) -> np.ndarray:
        out = np.zeros(self.dimension)
        k = len(state.selected)
        if k:
            emb = np.zeros(self.embedding_dim)
            pos = 0.0
            docs = set()
            for key in state.selected:
                emb += self._embeddings[key]
                pos += self._positions[key]
                docs.add(key[0])
            out[: self.embedding_dim] = emb / k
            out[self.embedding_dim] = len(docs) / self.n_docs
            out[self.embedding_dim + 1] = k / max(1, self.n_sentences)
            out[self.embedding_dim + 2] = pos / k
        out[self.embedding_dim + 3] = state.word_count / self.budget
        out[self.embedding_dim + 4] = 1.0
        return out


def run_policy(topic, choose, budget: int = DEFAULT_BUDGET) -> list:
    """Roll one episode with ``choose(state, actions) -> action``; returns
    the visited states, terminal last."""
    state = initial_state(topic, budget)
    states = [state]
    while not state.terminal:
        actions = legal_actions(state, topic, budget)
        state = step(state, choose(state, actions), topic, budget)
        states.append(state)
    return states


def train(topic, reward: RewardSpec, backend, episodes: int = 3000,
          seed: int = 0, budget: int = DEFAULT_BUDGET,
          learning_rate: float = 0.001, epsilon_start: float = 0.3,
          epsilon_end: float = 0.01) -> ValueFunction:
    """Linear TD(0) with an epsilon-greedy one-step-lookahead behavior policy.

    Non-terminal rewards are zero; the terminal reward is the configured
    metric. Deterministic given the seed.
    """
    if episodes < 1:
        raise ValidationError("episodes must be >= 1")
    reward.validate()
    rng = np.random.default_rng(seed)
    fmap = FeatureMap(topic, backend, budget)
    reward_fn = TerminalReward(topic, reward, backend)
    weights = np.zeros(fmap.dimension)
    for episode in range(episodes):
        frac = episode / (episodes - 1) if episodes > 1 else 1.0
        epsilon = epsilon_start + (epsilon_end - epsilon_start) * frac
        state = initial_state(topic, budget)
        phi = fmap.features(state)
        while not state.terminal:
            actions = legal_actions(state, topic, budget)
            if rng.random() < epsilon:
                action = actions[int(rng.integers(len(actions)))]
            else:
                best_value = -np.inf
                action = actions[0]
                for candidate in actions:
                    value = float(np.dot(
                        weights, fmap.features(step(state, candidate, topic, budget))
                    ))
                    if value > best_value:
                        best_value = value
                        action = candidate
            next_state = step(state, action, topic, budget)
            phi_next = fmap.features(next_state)
            if next_state.terminal:
                target = reward_fn(next_state)
            else:
                target = float(np.dot(weights, phi_next))
            delta = target - float(np.dot(weights, phi))
            weights = weights + learning_rate * delta * phi
            if not np.all(np.isfinite(weights)):
                raise TrainingError(
                    f"non-finite weights at episode {episode}", episode=episode
                )
            state = next_state
            phi = phi_next
    return ValueFunction(
        weights=weights, learning_rate=learning_rate, epsilon=epsilon_end,
        embedding_dim=fmap.embedding_dim, budget=budget,
    )


def rollout(topic, vf: ValueFunction, backend,
            budget: Optional[int] = None) -> ExtractState:
    """Greedy episode under the trained value function (ties follow
    document/position order)."""
    budget = vf.budget if budget is None else budget
    fmap = FeatureMap(topic, backend, budget)

    def choose(state, actions):
        best_value = -np.inf
        best = actions[0]
        for candidate in actions:
            value = vf.value(fmap.features(step(state, candidate, topic, budget)))
            if value > best_value:
                best_value = value
                best = candidate
        return best

    return run_policy(topic, choose, budget)[-1]


def random_rollout(topic, rng, budget: int = DEFAULT_BUDGET) -> ExtractState:
    return run_policy(
        topic, lambda state, actions: actions[int(rng.integers(len(actions)))], budget
    )[-1]


# --- ROUGE -----------------------------------------------------------------

def _ngram_counts(tokens, order):
    return Counter(tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1))


def _lcs_length(a, b) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[-1]


def _prf(overlap: float, n_ref: int, n_cand: int) -> tuple:
    recall = overlap / n_ref if n_ref else 0.0
    precision = overlap / n_cand if n_cand else 0.0
    f1 = (
        2.0 * recall * precision / (recall + precision)
        if recall + precision > 0
        else 0.0
    )
    return recall, precision, f1


def rouge(candidate, references, variant: str = "r1") -> tuple:
    """ROUGE over stem lists: clipped n-gram overlap (r1, r2) or LCS (rl).

    Multiple references are averaged; references with no n-grams of the
    requested order are skipped. Returns (recall, precision, f1).
    """
    if variant not in ("r1", "r2", "rl"):
        raise ValidationError(f"unknown rouge variant {variant!r}")
    refs = [list(r) for r in references if r]
    if not refs:
        raise ValidationError("need at least one non-empty reference")
    candidate = list(candidate)
    if not candidate:
        return (0.0, 0.0, 0.0)
    per_ref = []
    if variant in ("r1", "r2"):
        order = 1 if variant == "r1" else 2
        cand_counts = _ngram_counts(candidate, order)
        n_cand = max(0, len(candidate) - order + 1)
        for ref in refs:
            ref_counts = _ngram_counts(ref, order)
            if not ref_counts:
                continue
            overlap = sum(
                min(count, ref_counts[gram])
                for gram, count in cand_counts.items()
                if gram in ref_counts
            )
            per_ref.append(_prf(overlap, sum(ref_counts.values()), n_cand))
    else:
        for ref in refs:
            lcs = _lcs_length(candidate, ref)
            per_ref.append(_prf(lcs, len(ref), len(candidate)))
    if not per_ref:
        return (0.0, 0.0, 0.0)
    return tuple(float(np.mean([s[slot] for s in per_ref])) for slot in range(3))


def rouge_stems(sentences, stem: bool = True, remove_stopwords: bool = False) -> list:
    """Flatten sentence records into the token list ROUGE consumes."""
    out = []
    for sent in sentences:
        for tok in sent.tokens:
            if remove_stopwords and tok.is_stopword:
                continue
            out.append(tok.stem if stem else tok.surface)
    return out
