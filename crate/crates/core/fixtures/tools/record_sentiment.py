"""Records reference sentiment scores (unrounded) for the sentiment suite."""
import json
import os
import vaderSentiment.vaderSentiment as vs

vs.round = lambda x, n=None: x
HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.dirname(HERE)

SUITE = [
    "The cat sat on the mat.",
    "This is great!",
    "This is terrible.",
    "This is not great.",
    "The patch is very good, but the tests are slow.",
    "I really LOVE this design!!!",
    "Honestly the old API was kind of confusing.",
    "We should never use this awful hack again.",
    "Thanks, that works perfectly.",
    "The benchmark results look promising but memory usage is worse.",
    "Is this a good idea??",
    "I am not sure this is the right approach.",
    "Without doubt, the new scheduler is better.",
    "This change breaks the build and is a disaster.",
    "It is hardly a problem for most users.",
    "The implementation is extremely fast and reliable.",
    "No problem, I will fix the failing test.",
    "Sadly the cache strategy did not help at all.",
    "We could allocate memory segments off-heap using direct byte buffers.",
    "However, direct buffers are hard to release deterministically.",
]

an = vs.SentimentIntensityAnalyzer()
out = []
for s in SUITE:
    r = an.polarity_scores(s)
    out.append({"text": s, "pos": r["pos"], "neu": r["neu"], "neg": r["neg"], "compound": r["compound"]})
with open(os.path.join(FIX, "sentiment-suite.json"), "w") as f:
    json.dump(out, f, indent=2)
    f.write("\n")
for o in out:
    print(round(o["compound"], 4), round(o["pos"],3), round(o["neu"],3), o["text"])
sent = "I think we should allocate the segments with ByteBuffer.allocateDirect() as suggested."
print(an.polarity_scores(sent))
