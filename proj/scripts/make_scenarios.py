#!/usr/bin/env python3
"""Writes the bundled scenario files under scenarios/.

Geometry: the glasses camera looks straight down at the table from 0.6 m
(table point (x, y) -> pixel (cx + fx x / 0.6, cy + fy y / 0.6)); the robot
camera looks down from 0.8 m facing the user, so its image is flipped.
Run from the repo root:  python3 scripts/make_scenarios.py
"""

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "scenarios"

HUMAN_K = {"fx": 610.0, "fy": 610.0, "cx": 704.0, "cy": 704.0, "width": 1408, "height": 1408}
ROBOT_K = {"fx": 900.0, "fy": 900.0, "cx": 640.0, "cy": 360.0, "width": 1280, "height": 720}
HUMAN_DEPTH = 0.6
ROBOT_DEPTH = 0.8
PX_PER_CM = HUMAN_K["fx"] / (HUMAN_DEPTH * 100.0)
# pupil origin sits 1 cm right and 2 cm below the glasses camera
CAMERA_FROM_PUPIL_T = [0.01, 0.02, 0.0]
GAZE_RATE = 10.0
NEUTRAL = (0.0, 0.34)  # where the user looks between references


def human_px(x, y):
    return (HUMAN_K["cx"] + HUMAN_K["fx"] * x / HUMAN_DEPTH, HUMAN_K["cy"] + HUMAN_K["fy"] * y / HUMAN_DEPTH)


def robot_px(x, y):
    return (ROBOT_K["cx"] - ROBOT_K["fx"] * x / ROBOT_DEPTH, ROBOT_K["cy"] - ROBOT_K["fy"] * y / ROBOT_DEPTH)


def box(center, half_w, half_h):
    cx, cy = center
    return [round(cx - half_w, 3), round(cy - half_h, 3), round(cx + half_w, 3), round(cy + half_h, 3)]


def ellipse_rle(bbox, width, height):
    """COCO uncompressed RLE (column-major) of the ellipse inscribed in bbox."""
    x0, y0, x1, y1 = bbox
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    ax, ay = (x1 - x0) / 2, (y1 - y0) / 2
    xs = np.arange(width) + 0.5
    ys = np.arange(height) + 0.5
    gx, gy = np.meshgrid(xs, ys)  # row-major (y, x)
    inside = ((gx - cx) / ax) ** 2 + ((gy - cy) / ay) ** 2 <= 1.0
    flat = inside.T.reshape(-1).astype(np.uint8)  # column-major
    counts = []
    value, run = 0, 0
    for v in flat:
        if v == value:
            run += 1
        else:
            counts.append(run)
            value, run = v, 1
    counts.append(run)
    return {"counts": [int(c) for c in counts]}


def midpoint(b):
    return [(b[0] + b[2]) / 2, (b[1] + b[3]) / 2]


class Item:
    def __init__(self, key, category, x, y, half_w, half_h, kind="object", mask=False):
        self.key, self.category, self.kind = key, category, kind
        self.x, self.y = x, y
        self.half_w, self.half_h = half_w, half_h
        self.mask = mask

    def human(self):
        c = human_px(self.x, self.y)
        hw = HUMAN_K["fx"] * self.half_w / HUMAN_DEPTH
        hh = HUMAN_K["fy"] * self.half_h / HUMAN_DEPTH
        return {"id": "h_" + self.key, "category": self.category, "kind": self.kind,
                "bbox": box(c, hw, hh), "anchor_px": [round(c[0], 6), round(c[1], 6)],
                "position_m": [self.x, self.y, 0.0]}

    def robot(self):
        c = robot_px(self.x, self.y)
        hw = ROBOT_K["fx"] * self.half_w / ROBOT_DEPTH
        hh = ROBOT_K["fy"] * self.half_h / ROBOT_DEPTH
        o = {"id": "r_" + self.key, "category": self.category, "kind": self.kind, "bbox": box(c, hw, hh)}
        if self.mask:
            o["mask"] = ellipse_rle(o["bbox"], ROBOT_K["width"], ROBOT_K["height"])
        return o


KITCHEN = [
    Item("apple", "apple", -0.20, -0.10, 0.04, 0.04),
    Item("banana", "banana", 0.00, -0.16, 0.08, 0.03),
    Item("cup", "cup", 0.20, -0.10, 0.04, 0.04),
    Item("plate", "plate", -0.15, 0.12, 0.10, 0.10, mask=True),
    Item("bowl", "bowl", 0.16, 0.13, 0.08, 0.08, mask=True),
    Item("table_left", "table", -0.34, -0.02, 0.05, 0.05, kind="region"),
    Item("table_right", "table", 0.34, 0.00, 0.05, 0.05, kind="region"),
]


def pawn_grid():
    items = []
    for r, y in enumerate((-0.15, 0.0, 0.15)):
        for c, x in enumerate((-0.15, 0.0, 0.15)):
            items.append(Item(f"pawn_{r * 3 + c}", "pawn", x, y, 0.02, 0.02))
    return items


def words_for(text, start=0.5, dur=0.3, gap=0.15):
    words, t = [], start
    for w in text.split():
        words.append({"text": w, "t_start": round(t, 3), "t_end": round(t + dur, 3)})
        t += dur + gap
    return words


def rot_y(deg):
    a = math.radians(deg)
    return [[math.cos(a), 0.0, math.sin(a)], [0.0, 1.0, 0.0], [-math.sin(a), 0.0, math.cos(a)]]


def head_pose(t, moving):
    if not moving:
        return np.eye(3), np.zeros(3)
    yaw = 0.3 * math.sin(2 * math.pi * 0.4 * t)
    r = np.array(rot_y(yaw))
    tr = np.array([0.003 * math.sin(2 * math.pi * 0.3 * t), 0.002 * math.sin(2 * math.pi * 0.5 * t), 0.0])
    return r, tr


def gaze_stream(words, fixations, items_by_key, end_t, moving, jitter_px, rng, dropout=None):
    """fixations: list of (word index, item key); the user looks at the item
    from shortly before the word until the next fixation takes over."""
    spans = []
    for k, (wi, key) in enumerate(fixations):
        ws, we = words[wi]["t_start"], words[wi]["t_end"]
        start = ws - 0.35
        end = we + 0.15
        if k > 0:
            prev_we = words[fixations[k - 1][0]]["t_end"]
            cut = (prev_we + ws) / 2
            start = max(start, cut)
            spans[-1][1] = min(spans[-1][1], cut)
        spans.append([start, end, key])

    records, poses = [], []
    n = int(round(end_t * GAZE_RATE)) + 1
    t_pupil = np.array(CAMERA_FROM_PUPIL_T)
    for i in range(n):
        t = round(i / GAZE_RATE, 6)
        if dropout and dropout[0] <= t <= dropout[1]:
            continue
        target = NEUTRAL
        for s, e, key in spans:
            if s <= t < e:
                it = items_by_key[key]
                target = (it.x, it.y)
        # world point on the table, in the t=0 camera frame
        p_world = np.array([target[0], target[1], HUMAN_DEPTH])
        if jitter_px > 0:
            p_world[:2] += rng.normal(0.0, jitter_px * HUMAN_DEPTH / HUMAN_K["fx"], 2)
        r, tr = head_pose(t, moving)
        p_cam = r.T @ (p_world - tr)
        p_pupil = p_cam - t_pupil
        records.append({"t": t, "gaze": [round(float(v), 9) for v in p_pupil]})
        if moving:
            poses.append({"t": t, "rotation": [[round(float(v), 12) for v in row] for row in r],
                          "translation": [round(float(v), 12) for v in tr]})
    return records, poses


def scenario(sid, seed, text, scene_items, fixations, expected, template=None, moving=True, jitter_px=1.5,
             matcher=None, sigma_cm=0.0, extra=None, dropout=None, words=None):
    rng = np.random.default_rng(seed)
    words = words or words_for(text)
    by_key = {it.key: it for it in scene_items}
    end_t = words[-1]["t_end"] + 0.6
    records, poses = gaze_stream(words, fixations, by_key, end_t, moving, jitter_px, rng, dropout)
    doc = {
        "schema_version": 1,
        "id": sid,
        "seed": seed,
        "transcript": {"text": text, "words": words},
        "gaze": {"rate_hz": GAZE_RATE, "records": records},
        "frames": [{"t": round(k * 0.5, 3), "frame_id": f"{sid}/rgb_{k:04d}"} for k in range(int(end_t / 0.5) + 1)],
        "calibration": {
            "glasses_camera_from_pupil": {"rotation": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                                          "translation": CAMERA_FROM_PUPIL_T},
            "human_intrinsics": HUMAN_K,
            "robot_intrinsics": ROBOT_K,
        },
        "human_scene": {"objects": [it.human() for it in scene_items]},
        "robot_scene": {"objects": [it.robot() for it in scene_items]},
        "correspondence": {"h_" + it.key: "r_" + it.key for it in scene_items},
        "workspace": {"image_bounds": [0, 0, ROBOT_K["width"], ROBOT_K["height"]], "staging": [640, 640]},
        "matcher": matcher or {"matches_per_object": 30, "outlier_rate": 0.1, "jitter_px": 2.0},
        "noise": {"gaze_sigma_cm": sigma_cm, "px_per_cm": PX_PER_CM},
        "interpreter": {"padding_s": 0.0},
        "expected": expected,
    }
    if poses:
        doc["head_poses"] = poses
    if template:
        doc["expected"]["template"] = template
    if extra:
        doc.update(extra)
    return doc


def slots(*keys):
    return [{"human": "h_" + k, "robot": "r_" + k} for k in keys]


def word_index(text, word, occurrence=0):
    seen = -1
    for i, w in enumerate(text.split()):
        if w.strip(".,!?").lower() == word:
            seen += 1
            if seen == occurrence:
                return i
    raise ValueError(f"{word!r} not in {text!r}")


def fix(text, *pairs):
    """pairs of (word, occurrence, item key)."""
    return [(word_index(text, w, o), key) for w, o, key in pairs]


PICK = ["open_gripper", "pick", "close_gripper"]
PUT = PICK + ["put", "open_gripper"]


def table2():
    """One scenario per task-table row."""
    rows = []

    def add(sid, template, text, pairs, keys, actions, items=KITCHEN, **kw):
        rows.append((sid, scenario(sid, len(rows) + 11, text, items, fix(text, *pairs),
                                   {"slots": slots(*keys), "actions": actions}, template=template, **kw)))

    pawns = pawn_grid()
    add("t01_pick_object", "pick_object", "pick up the apple", [("apple", 0, "apple")], ["apple"], PICK)
    add("t02_grab_pieces", "grab_pieces", "grab the pawn", [("pawn", 0, "pawn_4")], ["pawn_4"], PICK,
        items=pawns, moving=False, jitter_px=0.0)
    add("t03_put_on_plate", "put_on_plate", "put the apple on the plate",
        [("apple", 0, "apple"), ("plate", 0, "plate")], ["apple", "plate"], PUT)
    t = "put the apple on the plate then pour some thing from the cup on it"
    add("t04_put_then_pour", "put_then_pour", t,
        [("apple", 0, "apple"), ("plate", 0, "plate"), ("cup", 0, "cup"), ("it", 0, "plate")],
        ["apple", "plate", "cup", "plate"], PUT + ["pick", "close_gripper", "pour", "put", "open_gripper"])
    add("t05_put_there", "put_there", "put this apple there",
        [("apple", 0, "apple"), ("there", 0, "table_right")], ["apple", "table_right"], PUT)
    add("t06_put_two_on_plate", "put_two_on_plate", "put the apple and the banana on the plate",
        [("apple", 0, "apple"), ("banana", 0, "banana"), ("plate", 0, "plate")], ["apple", "banana", "plate"],
        PUT + ["pick", "close_gripper", "put", "open_gripper"])
    t = "put the apple on the plate then put the banana on the bowl"
    add("t07_put_then_put", "put_then_put", t,
        [("apple", 0, "apple"), ("plate", 0, "plate"), ("banana", 0, "banana"), ("bowl", 0, "bowl")],
        ["apple", "plate", "banana", "bowl"], PUT + ["pick", "close_gripper", "put", "open_gripper"])
    add("t08_grab_lift_turn", "grab_lift_turn", "grab the cup and lift up for 10 cm then turn it for 90 degrees",
        [("cup", 0, "cup")], ["cup"], PICK + ["move_z", "rotate"])
    add("t09_pick_this", "pick_this", "pick up this", [("this", 0, "banana")], ["banana"], PICK)
    add("t10_grab_this", "grab_this", "grab this", [("this", 0, "pawn_0")], ["pawn_0"], PICK,
        items=pawns, moving=False, jitter_px=0.0)
    add("t11_put_this_on_that", "put_this_on_that", "put this on that",
        [("this", 0, "banana"), ("that", 0, "bowl")], ["banana", "bowl"], PUT)
    t = "put this on that then pour something from this on it"
    add("t12_put_this_then_pour", "put_this_then_pour", t,
        [("this", 0, "apple"), ("that", 0, "bowl"), ("this", 1, "cup"), ("it", 0, "bowl")],
        ["apple", "bowl", "cup", "bowl"], PUT + ["pick", "close_gripper", "pour", "put", "open_gripper"])
    add("t13_put_this_there", "put_this_there", "put this there",
        [("this", 0, "cup"), ("there", 0, "table_left")], ["cup", "table_left"], PUT)
    add("t14_put_this_and_this_on_that", "put_this_and_this_on_that", "put this and this on that",
        [("this", 0, "apple"), ("this", 1, "banana"), ("that", 0, "plate")], ["apple", "banana", "plate"],
        PUT + ["pick", "close_gripper", "put", "open_gripper"])
    t = "put this on this then put this on that"
    add("t15_put_this_then_put", "put_this_then_put", t,
        [("this", 0, "apple"), ("this", 1, "plate"), ("this", 2, "cup"), ("that", 0, "bowl")],
        ["apple", "plate", "cup", "bowl"], PUT + ["pick", "close_gripper", "put", "open_gripper"])
    add("t16_grab_this_lift_turn", "grab_this_lift_turn",
        "grab this and lift it up for 5 cm then turn it for 45 degrees",
        [("this", 0, "apple")], ["apple"], PICK + ["move_z", "rotate"])
    return rows


def s1(sid, seed, text, word, target_key):
    pawns = pawn_grid()
    return scenario(sid, seed, text, pawns, fix(text, (word, 0, target_key)),
                    {"slots": slots(target_key), "actions": PICK}, template="grab_pieces" if word == "pawn" else "grab_this",
                    moving=False, jitter_px=0.0, matcher={"matches_per_object": 30, "outlier_rate": 0.1, "jitter_px": 2.0})


def apple_example():
    text = "please put the apple there on the table"
    items = KITCHEN
    doc = scenario("apple_put_there", 7, text, items,
                   fix(text, ("apple", 0, "apple"), ("there", 0, "table_right")),
                   {"slots": slots("apple", "table_right"), "actions": PUT}, template="put_there")
    robot = {o["id"]: o for o in doc["robot_scene"]["objects"]}
    pos_apple = midpoint(robot["r_apple"]["bbox"])
    pos_there = midpoint(robot["r_table_right"]["bbox"])
    policy = [["open_gripper", {}], ["pick", {"label": "apple", "position": pos_apple}], ["close_gripper", {}],
              ["put", {"label": "table", "position": pos_there}], ["open_gripper", {}]]
    doc["expected"]["policy"] = policy
    w = {x["text"]: x for x in doc["transcript"]["words"]}
    o1 = {"slots": [
        {"label": "object", "category": "apple", "word": "apple", "occurrence": 0,
         "t_start": w["apple"]["t_start"], "t_end": w["apple"]["t_end"]},
        {"label": "position", "category": "table", "word": "there", "occurrence": 0,
         "t_start": w["there"]["t_start"], "t_end": w["there"]["t_end"]}]}
    doc["agent_responses"] = [
        {"template_id": "interpret.v1", "text": "```json\n" + json.dumps(o1, indent=2) + "\n```"},
        {"template_id": "plan.v1", "text": json.dumps(policy)},
    ]
    return doc


def faults():
    text = "put the apple on the plate"
    pairs = fix(text, ("apple", 0, "apple"), ("plate", 0, "plate"))
    base = {"slots": slots("apple", "plate"), "actions": PUT}
    out = []

    def add(sid, stage, **kw):
        exp = json.loads(json.dumps(base))
        exp["failure_stage"] = stage
        out.append((sid, scenario(sid, 100 + len(out), kw.pop("text", text), kw.pop("items", KITCHEN),
                                  kw.pop("pairs", pairs), exp, **kw)))

    # tracker dropout over the whole first reference
    w = words_for(text)
    add("fault_gaze_dropout", "Input", dropout=(w[2]["t_start"] - 0.2, w[3]["t_end"] + 0.2))
    # nothing of the named category in the robot view
    no_plate = [it for it in KITCHEN if it.key != "plate"]
    doc = scenario("fault_empty_detections", 102, text, KITCHEN, pairs, json.loads(json.dumps(base)))
    doc["robot_scene"]["objects"] = [it.robot() for it in no_plate]
    doc["correspondence"] = {"h_" + it.key: "r_" + it.key for it in no_plate}
    doc["expected"]["failure_stage"] = "Observation"
    out.append(("fault_empty_detections", doc))
    # user looks at the banana while saying "apple"
    t = "put this on the plate"
    add("fault_gaze_off_target", "Fusion", text=t, pairs=fix(t, ("this", 0, "banana"), ("plate", 0, "plate")))
    # matcher returns nothing
    add("fault_deleted_matches", "Alignment", matcher={"matches_per_object": 0, "outlier_rate": 0.0, "jitter_px": 0.0})
    # agent replies with prose instead of JSON
    add("fault_malformed_plan", "Planning", extra={"agent_responses": [
        {"template_id": "plan.v1",
         "text": "Sure! [open gripper], [pick, ['apple', position_apple]], [close gripper], [put, ['plate', position_plate]], [open gripper]"}]})
    add("fault_malformed_o1", "Planning", extra={"agent_responses": [
        {"template_id": "interpret.v1", "text": "{\"slots\": [{\"label\": \"object\", \"category\": \"apple\"}]}"}]})
    # plate lies outside the reachable part of the image
    add("fault_out_of_workspace", "Planning", extra={"workspace": {"image_bounds": [0, 0, 640, 720]}})
    return out


def write(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")


def main():
    write(OUT / "s1_pawns.json", s1("s1_pawns", 1, "grab the pawn", "pawn", "pawn_4"))
    write(OUT / "s1_pawns_corner.json", s1("s1_pawns_corner", 2, "grab this", "this", "pawn_0"))
    write(OUT / "s1_pawns_edge.json", s1("s1_pawns_edge", 3, "grab the pawn", "pawn", "pawn_1"))
    rows = dict(table2())
    for sid, row in (("s2_pick", "t01_pick_object"), ("s3_put_on_plate", "t03_put_on_plate"),
                     ("s4_put_then_pour", "t04_put_then_pour")):
        doc = json.loads(json.dumps(rows[row]))
        doc["id"] = sid
        write(OUT / f"{sid}.json", doc)
    write(OUT / "apple_put_there.json", apple_example())
    for sid, doc in rows.items():
        write(OUT / "table2" / f"{sid}.json", doc)
    for sid, doc in faults():
        write(OUT / "faults" / f"{sid}.json", doc)


if __name__ == "__main__":
    main()
