#!/usr/bin/env python3
"""Regenerates the bundled dataset under data/.

Everything is seeded, so running this twice produces identical files. The
original 360-degree footage is not redistributable; what ships instead is:

  videos.json                  10-video manifest (names, durations, roles)
  traces/video_NN.jsonl        per-sampled-frame detections, caption, telemetry
  baseline/video_NN.json       per-second RTSP/WebRTC bitrates (videos 1-9)
  eval/captions.json           generated vs human reference captions
  eval/frame_descriptions.json descriptions of generated 3D frames vs real frames
  scenes/                      compliant and adversarial scene-markup corpora
"""

import json
import math
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"
FPS = 30
PERIOD = 30

# id, name, duration (s). "2.05mins" / "1.05mins" are read as m:ss.
VIDEOS = [
    (1, "Thailand Stitched 360 footage", 25),
    (2, "Pebbly Beach", 120),
    (3, "Bavarian Alps", 125),
    (4, "Crystal Shower Falls", 120),
    (5, "London on Tower Bridge", 30),
    (6, "London Park Ducks and Swans", 65),
    (7, "View On Low Waterfall with Nice City", 10),
    (8, "Doi Suthep Temple", 25),
    (9, "Ayutthaya UAV Footage", 35),
    (10, "UAV video of Aalto University Finland", 120),
]

# Per-video content: COCO label pool with weights, typical and peak
# detection counts, and the captioner's brief captions.
CONTENT = {
    1: (["person", "motorcycle", "car", "umbrella", "potted plant", "bicycle", "handbag"], 7, 12,
        ["a busy street with people and motorcycles", "a market street with stalls and people",
         "people walking on a street in a city"]),
    2: (["person", "bird", "umbrella", "boat", "dog", "surfboard"], 4, 8,
        ["a beach with waves and rocks", "people walking on a pebble beach",
         "a view of the ocean from a rocky beach"]),
    3: (["cow", "person", "bird", "bench"], 2, 5,
        ["a view of snowy mountains under a blue sky", "a mountain range with a green valley",
         "a snow covered mountain with trees"]),
    4: (["person", "bird"], 1, 3,
        ["a waterfall in the middle of a forest", "a large waterfall over rocks",
         "water falling from a cliff into a pool"]),
    5: (["person", "car", "bus", "truck", "boat", "traffic light", "bicycle", "handbag"], 12, 19,
        ["a bridge over a river with a city", "a red bus driving on a bridge",
         "people walking across a bridge in a city"]),
    6: (["bird", "person", "bench", "dog", "bicycle", "handbag", "backpack"], 13, 20,
        ["a flock of ducks swimming on a lake", "swans and ducks in a park pond",
         "people feeding birds by a lake in a park"]),
    7: (["car", "person", "boat", "bird"], 3, 6,
        ["a waterfall in front of a city", "a river with a small waterfall and buildings",
         "a city skyline behind a waterfall"]),
    8: (["person", "umbrella", "potted plant", "bench"], 5, 9,
        ["a golden temple with people walking around", "a golden pagoda at a temple",
         "people visiting a buddhist temple"]),
    9: (["person", "car", "bird", "boat"], 2, 5,
        ["an aerial view of old temple ruins", "ruins of a brick temple among trees",
         "an aerial view of a park with old buildings"]),
    10: (["person", "car", "bench", "bicycle"], 3, 5,
         ["a red building with snow on the ground", "a building with snow covered trees",
          "two people standing in the snow"]),
}

REFERENCE_CAPTIONS = {
    1: "A wide 360 degree view of a busy Thai street market with food stalls, parked motorbikes and people walking between them.",
    2: "A pebbly beach with waves rolling onto the stones under a cloudy sky while a few people walk near the water.",
    3: "Snow-capped peaks of the Bavarian Alps rising above green alpine meadows and dark pine forest under a clear blue sky.",
    4: "A tall waterfall pouring down a mossy rock face into a clear pool surrounded by ferns and tall trees.",
    5: "The view from Tower Bridge in London over the river Thames with red double-decker buses, cars and crowds of pedestrians.",
    6: "Ducks and swans swimming on a lake in a London park while people on the grassy bank feed them next to benches and trees.",
    7: "A low wide waterfall in the foreground with the skyline of a modern city and its buildings behind the river.",
    8: "The golden pagoda of the Doi Suthep Buddhist temple surrounded by ornate shrines, parasols and visitors.",
    9: "An aerial drone view of the ancient Ayutthaya temple ruins with red brick stupas surrounded by green trees.",
    10: "A large red university building with a flat roof in winter, with snowy trees and ground and two people in front, one holding a camera and one flying a drone.",
}

# Output of the description agent for one randomly selected frame per video.
GENERATED_CAPTIONS = {
    1: "The image shows a crowded street market in Thailand with vendors' stalls, several motorcycles parked along the road and many people walking.",
    2: "The image depicts a beach covered in smooth pebbles with gentle waves reaching the shore, a grey cloudy sky and a couple of people near the water.",
    3: "The image depicts a mountain landscape with a green valley, a few cows grazing and some trees under a blue sky.",
    4: "The image shows water flowing over large rocks in a forest, with a person standing near the edge and birds in the trees.",
    5: "The image depicts a large bridge over a river in a city, with a red bus, several cars and many people crossing it.",
    6: "The image shows a lake in a park with many birds on the water, a few people on the grass and benches along a path.",
    7: "The image depicts a small waterfall on a river with a few cars and buildings of a city in the background.",
    8: "The image depicts a golden temple with a tall pagoda, umbrellas and people walking around the courtyard.",
    9: "The image shows an aerial view of old brick temple ruins with pointed towers surrounded by trees and a few people walking.",
    10: "The image depicts a large red building with a flat roof, surrounded by snow-covered trees and a snow-covered ground. There are two people in the foreground, one of them is holding a camera, and the other appears to be flying a drone.",
}

# A vision-language model's description of the rendered 3D frame versus its
# description of the real equirectangular frame.
FRAME_DESCRIPTIONS = {
    1: ("A 3D scene of a street with simple box-shaped stalls, small vehicles made of cylinders and figures standing along a road under a blue sky.",
        "A busy street market in Thailand with stalls, parked motorbikes and people walking between them."),
    2: ("A 3D scene with a grey pebble-textured ground, a blue animated plane of water and a cloudy sky, with two simple figures.",
        "A pebbly beach with waves rolling onto the stones under a cloudy sky and people near the water."),
    3: ("A 3D scene of grey cones standing on a green plane with a few small boxes and a blue sky.",
        "Snow-capped alpine peaks above green meadows and pine forest with cows grazing under a clear sky."),
    4: ("A 3D scene with a tall grey box, a blue animated plane falling down its side and green spheres around it.",
        "A tall waterfall pouring down a mossy rock face into a clear pool surrounded by ferns and trees."),
    5: ("A 3D scene with a long grey box spanning a blue plane and a few red boxes on top of it.",
        "Tower Bridge in London over the river Thames with red double-decker buses, cars and crowds of pedestrians."),
    6: ("A 3D scene with a blue plane and several white spheres on it next to green cones.",
        "Ducks and swans swimming on a park lake while people on the grassy bank feed them near benches and trees."),
    7: ("A 3D scene with an animated blue plane in front of several tall grey boxes representing buildings of a city.",
        "A low wide waterfall in front of a river with the skyline of a modern city behind it."),
    8: ("A 3D scene of a golden cone-shaped pagoda on a base surrounded by smaller golden shrines, parasols and visitors.",
        "The golden pagoda of the Doi Suthep Buddhist temple surrounded by ornate golden shrines, parasols and visitors."),
    9: ("A 3D scene seen from above with red brick cones and boxes representing temple ruins surrounded by green spheres as trees.",
        "An aerial view of ancient Ayutthaya temple ruins with red brick stupas surrounded by green trees."),
    10: ("A 3D scene with a large red box building with a flat roof, white cones as snowy trees on a white ground and two figures in front.",
         "A red university building with a flat roof in winter with snowy trees and ground and two people in front of it."),
}

# Per-video mean bitrates whose average is 5.9 / 5.8 Mbps.
UPLINK_MBPS = [6.30, 5.70, 6.10, 6.40, 5.60, 6.00, 5.50, 5.80, 5.70]
DOWNLINK_MBPS = [6.18, 5.61, 6.00, 6.29, 5.51, 5.90, 5.40, 5.71, 5.60]

AALTO = (60.186720, 24.827650)


def fixed(x, d):
    v = round(x, d)
    return 0.0 if v == 0 else v


def make_box(rng):
    w = rng.uniform(0.02, 0.18)
    h = rng.uniform(0.03, 0.25)
    x = rng.uniform(0.0, 1.0 - w)
    y = rng.uniform(0.0, 1.0 - h)
    return [fixed(x, 3), fixed(y, 3), fixed(w, 3), fixed(h, 3)]


def detection(rng, label):
    return {"box": make_box(rng), "conf": fixed(rng.uniform(0.45, 0.98), 2), "label": label}


def telemetry_series(rng, vid, seconds):
    lat0, lon0 = AALTO
    heading = rng.uniform(0, 2 * math.pi)
    alt = rng.uniform(25.0, 60.0)
    lat, lon = lat0, lon0
    wind_dir = rng.uniform(0, 2 * math.pi)
    wind_tilt = rng.uniform(0.2, 1.2)
    out = []
    for s in range(seconds):
        speed = max(0.0, min(5.0, 2.5 + 2.5 * math.sin(s / 9.0 + vid)))
        heading += rng.uniform(-0.15, 0.15)
        alt = max(15.0, min(120.0, alt + rng.uniform(-1.5, 1.8)))
        north = speed * math.cos(heading)
        east = speed * math.sin(heading)
        lat += north / 111_320.0
        lon += east / (111_320.0 * math.cos(math.radians(lat)))
        ax = wind_tilt * math.cos(wind_dir) + rng.uniform(-0.05, 0.05)
        ay = wind_tilt * math.sin(wind_dir) + rng.uniform(-0.05, 0.05)
        az = -9.81 + rng.uniform(-0.05, 0.05)
        out.append({
            "accel": [fixed(ax, 2), fixed(ay, 2), fixed(az, 2)],
            "alt": fixed(alt, 2),
            "gyro": [fixed(rng.uniform(-0.02, 0.02), 4) for _ in range(3)],
            "lat": fixed(lat, 6),
            "lon": fixed(lon, 6),
            "speed": fixed(speed, 2),
            "ts": s * 1_000_000,
        })
    return out


def write_traces():
    (ROOT / "traces").mkdir(parents=True, exist_ok=True)
    for vid, _, duration in VIDEOS:
        rng = random.Random(1000 + vid)
        labels, typical, peak, captions = CONTENT[vid]
        seconds = math.ceil(duration * FPS / PERIOD)
        telemetry = telemetry_series(rng, vid, seconds)
        lines = []
        for s in range(seconds):
            if vid == 10 and s == 0:
                dets = [detection(rng, "person"), detection(rng, "person"), detection(rng, "car"),
                        detection(rng, "bench")]
                caption = captions[0]
            else:
                count = peak if s % 17 == 3 else max(0, typical + rng.randint(-2, 2))
                count = min(count, peak)
                dets = [detection(rng, rng.choice(labels)) for _ in range(count)]
                caption = captions[(s // 7) % len(captions)]
            if vid == 8 and s == 0:
                caption = captions[0]
            dets.sort(key=lambda d: (-d["conf"], d["label"]))
            lines.append(json.dumps({
                "caption": caption,
                "detections": dets,
                "frame_index": s * PERIOD,
                "telemetry": telemetry[s],
            }, sort_keys=True, separators=(",", ":")))
        (ROOT / "traces" / f"video_{vid:02d}.jsonl").write_text("\n".join(lines) + "\n")


def write_baseline():
    (ROOT / "baseline").mkdir(parents=True, exist_ok=True)
    for (vid, _, duration), up, down in zip(VIDEOS[:9], UPLINK_MBPS, DOWNLINK_MBPS):
        rng = random.Random(2000 + vid)
        noise = [0.06 * math.sin(t / 4.0 + vid) + rng.uniform(-0.04, 0.04) for t in range(duration)]
        mean_noise = sum(noise) / len(noise)
        noise = [n - mean_noise for n in noise]
        uplink = [int(round(up * 1e6 * (1 + n))) for n in noise]
        ratio = down / up
        downlink = [int(math.floor(u * ratio)) for u in uplink]
        doc = {"downlink_bps": downlink, "duration_s": duration, "uplink_bps": uplink,
               "resolution": "3840x1920 ERP", "video_id": vid}
        (ROOT / "baseline" / f"video_{vid:02d}.json").write_text(json.dumps(doc, indent=1) + "\n")


def write_manifest():
    videos = []
    for vid, name, duration in VIDEOS:
        entry = {"id": vid, "name": name, "duration_s": duration, "fps": FPS,
                 "role": "benchmark" if vid <= 9 else "validation",
                 "annotation_trace": f"traces/video_{vid:02d}.jsonl"}
        if vid <= 9:
            entry["baseline_trace"] = f"baseline/video_{vid:02d}.json"
        videos.append(entry)
    (ROOT / "videos.json").write_text(json.dumps({"videos": videos}, indent=2) + "\n")


def write_eval():
    (ROOT / "eval").mkdir(parents=True, exist_ok=True)
    captions = [{"video": v, "generated": GENERATED_CAPTIONS[v], "reference": REFERENCE_CAPTIONS[v]}
                for v in range(1, 11)]
    (ROOT / "eval" / "captions.json").write_text(json.dumps(captions, indent=2) + "\n")
    frames = [{"video": v, "generated_frame": FRAME_DESCRIPTIONS[v][0], "real_frame": FRAME_DESCRIPTIONS[v][1]}
              for v in range(1, 11)]
    (ROOT / "eval" / "frame_descriptions.json").write_text(json.dumps(frames, indent=2) + "\n")


# ---- scene corpora -----------------------------------------------------------

COLORS = ["#87CEEB", "#FFFFFF", "#4CC3D9", "#EF2D5E", "#FFC65D", "#7BC8A4", "#A0522D", "#2E8B57", "#B22222",
          "#D4AF37", "#808080", "#1E90FF"]
SHAPES = ["a-box", "a-sphere", "a-cylinder", "a-cone", "a-torus", "a-plane", "a-ring", "a-dodecahedron"]


def rand_pos(rng):
    return f"{rng.uniform(-6, 6):.1f} {rng.uniform(0, 4):.1f} {rng.uniform(-9, -2):.1f}"


def shape_el(rng, animated, indent="    "):
    tag = rng.choice(SHAPES)
    attrs = [f'position="{rand_pos(rng)}"', f'color="{rng.choice(COLORS)}"']
    if tag in ("a-box",):
        attrs.append(f'depth="{rng.uniform(0.5, 3):.1f}" height="{rng.uniform(0.5, 3):.1f}" width="{rng.uniform(0.5, 3):.1f}"')
    elif tag in ("a-sphere", "a-dodecahedron"):
        attrs.append(f'radius="{rng.uniform(0.3, 1.5):.2f}"')
    elif tag in ("a-cylinder", "a-cone"):
        attrs.append(f'height="{rng.uniform(0.5, 4):.1f}"')
    elif tag == "a-plane":
        attrs.append(f'rotation="-90 0 0" width="{rng.randint(4, 30)}" height="{rng.randint(4, 30)}"')
    if animated:
        prop = rng.choice(["rotation", "position", "scale"])
        to = {"rotation": "0 360 0", "position": "0 2 -5", "scale": "1.2 1.2 1.2"}[prop]
        attrs.append(f'animation="property: {prop}; to: {to}; loop: true; dur: {rng.randint(2, 9)}000"')
    return f"{indent}<{tag} {' '.join(attrs)}></{tag}>"


def compliant_scene(rng, with_sky=True):
    lines = ["<a-scene>"]
    if with_sky:
        lines.append(f'  <a-sky color="{rng.choice(COLORS)}"></a-sky>')
    lines.append('  <a-plane rotation="-90 0 0" width="40" height="40" color="#FFFFFF"></a-plane>')
    n = rng.randint(3, 7)
    group = rng.random() < 0.5
    if group:
        lines.append(f'  <a-entity position="{rand_pos(rng)}">')
    animated_index = rng.randrange(n)
    for i in range(n):
        lines.append(shape_el(rng, i == animated_index, "    " if group else "  "))
    if group:
        lines.append("  </a-entity>")
    if rng.random() < 0.4:
        lines.append(f'  <a-text value="Scene &amp; view" position="{rand_pos(rng)}" color="#000000"></a-text>')
    lines.append("</a-scene>")
    body = "\n".join(lines)
    if rng.random() < 0.5:
        return "Here is the A-Frame scene:\n\n```html\n" + body + "\n```\n"
    return body + "\n"


def inject(rng, scene, kind):
    """Adds exactly one violation of `kind` to a compliant scene."""
    fenced = scene.startswith("Here")
    if kind == "multiple-code-blocks":
        body = scene if not fenced else scene.split("```html\n", 1)[1].rsplit("\n```", 1)[0]
        return "```html\n" + body + "\n```\nAlternatively:\n```html\n" + body + "\n```\n"
    if kind == "missing-animation":
        import re
        return re.sub(r' animation="[^"]*"', "", scene)
    snippet = {
        "forbidden-tag": rng.choice([
            '  <a-assets><img id="sky" src="sky.png"></a-assets>'.replace("<img", "<a-asset-item").replace('src="sky.png">', 'src="sky.png"></a-asset-item>'),
            '  <a-light type="ambient" color="#BBB"></a-light>',
            '  <a-light type="point" intensity="2" position="2 4 4"></a-light>',
            '  <a-assets></a-assets>',
        ]),
        "script": rng.choice([
            '  <script>document.querySelector("a-box").setAttribute("color", "red")</script>',
            '  <a-box position="0 1 -3" onclick="this.setAttribute(\'color\', \'red\')"></a-box>',
            '  <a-entity position="0 2 -4" onload="init()"></a-entity>',
            '  <a-sphere position="1 1 -3" radius="0.5" link="href: javascript:alert(1)"></a-sphere>',
        ]),
        "forbidden-attribute": rng.choice([
            '  <a-entity gltf-model="#tree" position="2 0 -5"></a-entity>',
            '  <a-entity glb-model="#house" position="-2 0 -6"></a-entity>',
            '  <a-gltf-model src="#drone" position="0 3 -4"></a-gltf-model>',
            '  <a-entity obj="x" src="models/tree.glb" position="0 0 -5"></a-entity>',
        ]),
        "external-link": rng.choice([
            '  <a-box position="0 1 -3" src="https://cdn.example.com/textures/brick.jpg"></a-box>',
            '  <a-image src="http://example.org/snow.png" position="0 2 -4"></a-image>',
            '  <a-entity sound="src: url(https://example.com/wind.mp3); autoplay: true"></a-entity>',
            '  <a-plane position="0 0 -6" material="src: //cdn.example.net/ground.png"></a-plane>',
        ]),
        "deprecated-animation-element": rng.choice([
            '  <a-box position="0 1 -3"><a-animation attribute="rotation" to="0 360 0" repeat="indefinite"></a-animation></a-box>',
            '  <a-sphere position="2 1 -4" radius="0.4"><a-animation attribute="position" to="2 3 -4"></a-animation></a-sphere>',
        ]),
        "background-component": None,
    }[kind]
    if kind == "background-component":
        return scene.replace("<a-scene>", f'<a-scene background="color: {rng.choice(COLORS)}">', 1)
    return scene.replace("</a-scene>", snippet + "\n</a-scene>", 1)


def write_scenes():
    base = ROOT / "scenes"
    for sub in ("compliant", "adversarial"):
        (base / sub).mkdir(parents=True, exist_ok=True)
        for f in (base / sub).glob("*.html"):
            f.unlink()
    rng = random.Random(42)
    manifest = {"compliant": [], "adversarial": []}
    for i in range(24):
        text = compliant_scene(rng, with_sky=(i % 4 != 3))
        name = f"compliant/scene_{i:02d}.html"
        (base / name).write_text(text)
        manifest["compliant"].append({"file": name})
    kinds = ["forbidden-tag", "script", "forbidden-attribute", "external-link", "missing-animation",
             "deprecated-animation-element", "background-component", "multiple-code-blocks"]
    idx = 0
    for kind in kinds:
        for _ in range(7):
            scene = compliant_scene(rng)
            text = inject(rng, scene, kind)
            name = f"adversarial/{idx:02d}_{kind}.html"
            (base / name).write_text(text)
            manifest["adversarial"].append({"file": name, "rule": kind})
            idx += 1
    (base / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def main():
    write_manifest()
    write_traces()
    write_baseline()
    write_eval()
    write_scenes()


if __name__ == "__main__":
    main()
