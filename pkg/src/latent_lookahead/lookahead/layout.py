"""Expanded layouts: visible tokens interleaved with thought slots.

A thought anchored at visible index i contributes tau consecutive extra slots
placed immediately after x_i in the expanded order. Latent slots carry injected
vectors; pause slots carry a discrete pause token. Every slot's position index
is its index in the fully expanded sequence, at training and inference alike.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .schedule import ThoughtSchedule

LATENT_LOOKAHEAD = "latent_lookahead"
PAUSE_TOKENS = "pause_tokens"
MTP_AUX_HEADS = "mtp_aux_heads"
LOOPED_UNSUPERVISED = "looped_unsupervised"
NTP_BASELINE = "ntp_baseline"
VARIANTS = (LATENT_LOOKAHEAD, PAUSE_TOKENS, MTP_AUX_HEADS, LOOPED_UNSUPERVISED, NTP_BASELINE)

KIND_VISIBLE = 0
KIND_LATENT = 1
KIND_PAUSE = 2

# variants whose extra slots hold injected vectors generated by the unroll
LATENT_VARIANTS = (LATENT_LOOKAHEAD, LOOPED_UNSUPERVISED)
# variants with no extra slots at all
PLAIN_VARIANTS = (MTP_AUX_HEADS, NTP_BASELINE)


@dataclass
class ExpandedLayout:
    """One sample's slot grid plus supervision channels.

    kinds/vis_index/step_j describe each slot: vis_index is the slot's own
    visible index for visible slots and the anchor's index for thought slots;
    step_j is the 1-based step within a thought (0 for visible slots).
    """

    variant: str
    tokens: np.ndarray
    answer_start: int
    schedule: ThoughtSchedule | None
    kinds: np.ndarray = field(repr=False, default=None)
    vis_index: np.ndarray = field(repr=False, default=None)
    step_j: np.ndarray = field(repr=False, default=None)
    slot_tokens: np.ndarray = field(repr=False, default=None)
    ntp_targets: np.ndarray = field(repr=False, default=None)
    ntp_mask: np.ndarray = field(repr=False, default=None)
    latent_targets: np.ndarray = field(repr=False, default=None)
    latent_mask: np.ndarray = field(repr=False, default=None)
    slot_of_visible: np.ndarray = field(repr=False, default=None)

    @property
    def T(self) -> int:
        return int(self.tokens.shape[0])

    @property
    def length(self) -> int:
        return int(self.kinds.shape[0])

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.length, dtype=np.int64)

    def slot_of_thought(self, anchor: int, j: int) -> int:
        """Slot index of a thought's j-th extra slot (1-based j)."""
        hits = np.where((self.kinds != KIND_VISIBLE) & (self.vis_index == anchor) & (self.step_j == j))[0]
        if len(hits) != 1:
            raise KeyError(f"no thought slot (anchor={anchor}, j={j})")
        return int(hits[0])


def build_layout(
    tokens: np.ndarray,
    answer_start: int,
    variant: str,
    schedule: ThoughtSchedule | None,
    *,
    pause_id: int | None = None,
    loss_on_question: bool = False,
    looped_target_last: bool = False,
) -> ExpandedLayout:
    """Expand one token sequence into slots and attach supervision channels.

    NTP channel: visible slot at index k predicts tokens[k+1] inside the loss
    region (the answer, unless loss_on_question). Pause thoughts add the next
    token as an NTP target on their final slot. Latent channel: slot (i, j)
    predicts tokens[i+j]; the looped variant supervises only j == tau, with
    target tokens[i+1] by default or tokens[i+tau] when looped_target_last.
    """
    tokens = np.asarray(tokens, dtype=np.int64)
    T = int(tokens.shape[0])
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if not 1 <= answer_start <= T - 1:
        raise ValueError(f"answer_start {answer_start} outside [1, {T - 1}]")
    has_slots = variant not in PLAIN_VARIANTS
    if variant == PAUSE_TOKENS and pause_id is None:
        raise ValueError("pause variant needs pause_id")
    if schedule is None:
        if has_slots:
            raise ValueError(f"variant {variant} needs a schedule")
    else:
        schedule.validate_for(T)

    anchors = set(schedule.anchors) if (schedule and has_slots) else set()
    tau = schedule.tau if schedule else 0
    kind = KIND_PAUSE if variant == PAUSE_TOKENS else KIND_LATENT

    kinds, vis_index, step_j, slot_tokens = [], [], [], []
    slot_of_visible = np.zeros(T, dtype=np.int64)
    for i in range(T):
        slot_of_visible[i] = len(kinds)
        kinds.append(KIND_VISIBLE)
        vis_index.append(i)
        step_j.append(0)
        slot_tokens.append(int(tokens[i]))
        if i in anchors:
            for j in range(1, tau + 1):
                kinds.append(kind)
                vis_index.append(i)
                step_j.append(j)
                slot_tokens.append(pause_id if kind == KIND_PAUSE else -1)

    kinds = np.array(kinds, dtype=np.int8)
    vis_index = np.array(vis_index, dtype=np.int64)
    step_j = np.array(step_j, dtype=np.int64)
    slot_tokens = np.array(slot_tokens, dtype=np.int64)
    L = len(kinds)

    ntp_targets = np.zeros(L, dtype=np.int64)
    ntp_mask = np.zeros(L, dtype=bool)
    latent_targets = np.zeros(L, dtype=np.int64)
    latent_mask = np.zeros(L, dtype=bool)

    first_pred = 0 if loss_on_question else answer_start - 1
    for s in range(L):
        if kinds[s] == KIND_VISIBLE:
            k = vis_index[s]
            if first_pred <= k <= T - 2:
                ntp_targets[s] = tokens[k + 1]
                ntp_mask[s] = True
        elif kinds[s] == KIND_PAUSE:
            if step_j[s] == tau:
                ntp_targets[s] = tokens[vis_index[s] + 1]
                ntp_mask[s] = True
        else:
            i, j = int(vis_index[s]), int(step_j[s])
            if variant == LOOPED_UNSUPERVISED:
                if j == tau:
                    t = i + tau if looped_target_last else i + 1
                    if t <= T - 1:
                        latent_targets[s] = tokens[t]
                        latent_mask[s] = True
            else:
                if i + j <= T - 1:
                    latent_targets[s] = tokens[i + j]
                    latent_mask[s] = True

    return ExpandedLayout(
        variant=variant,
        tokens=tokens,
        answer_start=answer_start,
        schedule=schedule,
        kinds=kinds,
        vis_index=vis_index,
        step_j=step_j,
        slot_tokens=slot_tokens,
        ntp_targets=ntp_targets,
        ntp_mask=ntp_mask,
        latent_targets=latent_targets,
        latent_mask=latent_mask,
        slot_of_visible=slot_of_visible,
    )


def make_pause_layout(
    tokens: np.ndarray,
    answer_start: int,
    schedule: ThoughtSchedule,
    pause_id: int,
    **kw,
) -> ExpandedLayout:
    """Pause-token baseline layout: discrete pause bursts at the same anchors."""
    return build_layout(tokens, answer_start, PAUSE_TOKENS, schedule, pause_id=pause_id, **kw)


@dataclass
class BatchedLayout:
    """Equal-shape stack of per-sample layouts plus precomputed unroll indexing.

    anchor_slots (B, K): slot index of each thought's anchor visible slot.
    inject_slots (tau, B, K): slot written by each unroll round.
    shared: True when every sample has identical slot structure, letting masks
    broadcast as (1, 1, L, L).
    """

    layouts: list[ExpandedLayout]
    slot_tokens: np.ndarray
    kinds: np.ndarray
    vis_index: np.ndarray
    step_j: np.ndarray
    positions: np.ndarray
    ntp_targets: np.ndarray
    ntp_mask: np.ndarray
    latent_targets: np.ndarray
    latent_mask: np.ndarray
    anchor_slots: np.ndarray | None
    inject_slots: np.ndarray | None
    shared: bool

    @property
    def batch(self) -> int:
        return int(self.slot_tokens.shape[0])

    @property
    def length(self) -> int:
        return int(self.slot_tokens.shape[1])

    @property
    def variant(self) -> str:
        return self.layouts[0].variant

    @property
    def tau(self) -> int:
        sched = self.layouts[0].schedule
        return sched.tau if sched else 0


def stack_layouts(layouts: list[ExpandedLayout]) -> BatchedLayout:
    """Stack equal-length layouts; lengths must already match (pad upstream)."""
    lengths = {l.length for l in layouts}
    if len(lengths) != 1:
        raise ValueError(f"layouts have mixed expanded lengths {sorted(lengths)}")
    variants = {l.variant for l in layouts}
    if len(variants) != 1:
        raise ValueError(f"layouts have mixed variants {sorted(variants)}")

    first = layouts[0]
    shared = all(
        np.array_equal(l.kinds, first.kinds)
        and np.array_equal(l.vis_index, first.vis_index)
        and np.array_equal(l.step_j, first.step_j)
        for l in layouts[1:]
    )
    anchor_slots = inject_slots = None
    if first.variant in LATENT_VARIANTS:
        tau = first.schedule.tau
        anchor_slots = np.stack(
            [[l.slot_of_visible[a] for a in l.schedule.anchors] for l in layouts]
        )
        inject_slots = np.stack(
            [
                np.stack([[l.slot_of_thought(a, j) for a in l.schedule.anchors] for l in layouts])
                for j in range(1, tau + 1)
            ]
        )
    return BatchedLayout(
        layouts=layouts,
        slot_tokens=np.stack([l.slot_tokens for l in layouts]),
        kinds=np.stack([l.kinds for l in layouts]),
        vis_index=np.stack([l.vis_index for l in layouts]),
        step_j=np.stack([l.step_j for l in layouts]),
        positions=np.stack([l.positions for l in layouts]),
        ntp_targets=np.stack([l.ntp_targets for l in layouts]),
        ntp_mask=np.stack([l.ntp_mask for l in layouts]),
        latent_targets=np.stack([l.latent_targets for l in layouts]),
        latent_mask=np.stack([l.latent_mask for l in layouts]),
        anchor_slots=anchor_slots,
        inject_slots=inject_slots,
        shared=shared,
    )


def pad_layout(layout: ExpandedLayout, width: int, pad_id: int) -> ExpandedLayout:
    """Append inert pad slots so the expanded length reaches width.

    Pads are visible slots with both supervision masks off. They sit at the
    end, so no real slot's attention row can reach them and the real slots'
    activations are unchanged.
    """
    extra = width - layout.length
    if extra < 0:
        raise ValueError(f"layout length {layout.length} exceeds width {width}")
    if extra == 0:
        return layout
    n_vis = layout.T
    return ExpandedLayout(
        variant=layout.variant,
        tokens=layout.tokens,
        answer_start=layout.answer_start,
        schedule=layout.schedule,
        kinds=np.concatenate([layout.kinds, np.full(extra, KIND_VISIBLE, dtype=np.int8)]),
        vis_index=np.concatenate(
            [layout.vis_index, np.arange(n_vis, n_vis + extra, dtype=np.int64)]
        ),
        step_j=np.concatenate([layout.step_j, np.zeros(extra, dtype=np.int64)]),
        slot_tokens=np.concatenate(
            [layout.slot_tokens, np.full(extra, pad_id, dtype=np.int64)]
        ),
        ntp_targets=np.concatenate([layout.ntp_targets, np.zeros(extra, dtype=np.int64)]),
        ntp_mask=np.concatenate([layout.ntp_mask, np.zeros(extra, dtype=bool)]),
        latent_targets=np.concatenate(
            [layout.latent_targets, np.zeros(extra, dtype=np.int64)]
        ),
        latent_mask=np.concatenate([layout.latent_mask, np.zeros(extra, dtype=bool)]),
        slot_of_visible=layout.slot_of_visible,
    )
