"""
Driving an external trainee over the wire protocol
===================================================

Any process that speaks newline-delimited JSON on stdin/stdout can be tuned.
This demo writes a tiny self-contained trainee script, then drives one
training through the subprocess client.
"""
import sys
import tempfile
from pathlib import Path

from botune import TrainRequest, run_external_trainee

TRAINEE = '''
import json, sys

def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\\n")
    sys.stdout.flush()

emit({"type": "capabilities", "version": 1,
      "directives": ["l2_regularization"], "name": "demo-quadratic"})
req = json.loads(sys.stdin.readline())
lr = req["assignment"]["lr"]
loss = (lr - 0.01) ** 2 * 100 + 0.05   # pretend the sweet spot is lr = 0.01
for epoch in range(req["epochs"]):
    value = loss + (1.0 - loss) * (0.5 ** epoch)
    emit({"type": "epoch", "epoch": epoch,
          "train_loss": value * 0.9, "val_loss": value,
          "train_acc": min(0.99, 1.0 - value / 2),
          "val_acc": min(0.95, 1.0 - value / 2)})
emit({"type": "result", "objective": value,
      "final_val_loss": value, "final_val_acc": min(0.95, 1.0 - value / 2)})
'''

with tempfile.TemporaryDirectory() as tmp:
    script = Path(tmp) / "trainee.py"
    script.write_text(TRAINEE)
    request = TrainRequest(
        {"lr": 0.02}, directives=("l2_regularization", "batch_normalization"),
        epochs=5, seed=0,
    )
    # batch_normalization is not in the declared capabilities, so the client
    # downgrades the request and logs it instead of failing
    history, result = run_external_trainee([sys.executable, str(script)], request, 30)

print("epochs received:", history.epochs)
print("validation loss:", [round(v, 4) for v in history.val_loss])
print("objective:      ", round(result.objective, 4))
