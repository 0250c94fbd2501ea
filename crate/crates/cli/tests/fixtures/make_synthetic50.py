"""Regenerates the synthetic50 corpus and its golden statistics.

The statistics are computed here, directly from the generated records, so
they serve as an independent check on `stance stats`.
"""
import random
from pathlib import Path

OUT = Path(__file__).parent / "synthetic50"

EN = ["the", "money", "bank", "queue", "support", "good", "bad", "black", "cash", "today",
      "people", "policy", "great", "move", "long", "line", "atm", "corruption", "poor", "fight"]
HI = ["hai", "nahi", "kya", "bahut", "accha", "bura", "log", "paisa", "sarkar", "kaam",
      "lekin", "sab", "abhi", "gaya", "kar", "raha", "hum", "desh", "garib", "galat"]
REST = ["#Notebandi", "#demonetisation", "@PMOIndia", "@RBI", "https://t.co/x1", "Modi", "RBI",
        "!", "?", "...", ":)", "500", "1000", "2016"]
CUES = {
    "FAVOR": (["support", "great", "good", "fight"], ["accha", "sahi"]),
    "AGAINST": (["bad", "poor", "long"], ["bura", "galat", "garib"]),
    "NONE": (["today", "bank", "policy"], ["kya", "abhi"]),
}


def main():
    rng = random.Random(20161108)
    labels = ["FAVOR"] * 14 + ["AGAINST"] * 11 + ["NONE"] * 25
    rng.shuffle(labels)
    text, lang, stance = [], [], []
    tokens_total = {"en": 0, "hi": 0, "rest": 0}
    for i, label in enumerate(labels):
        tid = f"8{i:05d}"
        en_cues, hi_cues = CUES[label]
        toks = []
        toks.append((rng.choice(en_cues), "en"))
        toks.append((rng.choice(hi_cues), "hi"))
        for _ in range(rng.randint(3, 14)):
            r = rng.random()
            if r < 0.45:
                toks.append((rng.choice(HI), "hi"))
            elif r < 0.8:
                toks.append((rng.choice(EN), "en"))
            else:
                toks.append((rng.choice(REST), "rest"))
        rng.shuffle(toks)
        text.append(f"{tid}\n{' '.join(t for t, _ in toks)}\n")
        lang.append(f"{tid}\n" + "".join(f"{t}\t{g}\n" for t, g in toks))
        stance.append(f"{tid}\n{label}\n")
        for _, g in toks:
            tokens_total[g] += 1

    OUT.mkdir(exist_ok=True)
    (OUT / "text.txt").write_text("\n".join(text))
    (OUT / "lang.txt").write_text("\n".join(lang))
    (OUT / "stance.txt").write_text("\n".join(stance))

    n = len(labels)
    all_tokens = sum(tokens_total.values())
    golden = (
        f"total={n}\n"
        f"favor={labels.count('FAVOR')}\n"
        f"against={labels.count('AGAINST')}\n"
        f"none={labels.count('NONE')}\n"
        f"avg_tokens={all_tokens / n:.1f}\n"
        f"avg_en={tokens_total['en'] / n:.1f}\n"
        f"avg_hi={tokens_total['hi'] / n:.1f}\n"
        f"avg_rest={tokens_total['rest'] / n:.1f}\n"
    )
    (OUT / "golden_stats.txt").write_text(golden)
    print(golden, end="")
    print("exact means:", {k: v / n for k, v in tokens_total.items()}, all_tokens / n)


if __name__ == "__main__":
    main()
