"""
Serving checks and watching the flag rate
=========================================

Start the service on a free port, replay a short log of requests with
timestamps, and read back per-minute statistics.
"""

import os
import threading

from transcheck import CheckClient, make_server

here = os.path.dirname(os.path.abspath(__file__))
lex = os.path.join(here, os.pardir, "tests", "fixtures", "omission_zh_en.lex")

server = make_server([lex], window=60)
threading.Thread(target=server.serve_forever, daemon=True).start()
host, port = server.server_address[:2]

log = [
    ("妈妈 和 桌", "mother and table"),
    ("妈妈 和 桌", "mother and desk"),
    ("妈妈 和 桌", "my aunt"),
    ("桌 上", "on the floor"),
]
with CheckClient(host, port) as client:
    for i in range(40):
        src, tgt = log[i % len(log)]
        resp = client.check("zh-en", src, tgt, timestamp=10.0 * i)
    print("last response:", resp)
    stats = client.stats()

for w in stats["windows"]:
    print(f"t={w['window_start']:5.0f}s checked={w['tasks_checked']} flagged={w['flagged_tasks']}"
          f" unique={w['unique_flagged']}")
server.shutdown()
server.server_close()
