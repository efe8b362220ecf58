#!/usr/bin/env python3
"""Builds the synthetic Posts.xml ingest fixture and its expected outputs.

The expected corpus.jsonl / split.json are produced by an independent Python
model of the pipeline (ElementTree for the dump, HTMLParser for body text, a
pure-Python mt19937_64 for the split). Regenerate with:

    python3 tests/fixtures/make_ingest_fixture.py tests/fixtures/ingest
"""

import json
import sys
from html.parser import HTMLParser
from pathlib import Path
from xml.etree import ElementTree
from xml.sax.saxutils import escape

MIN_UPVOTES = 100
RAG_MIN_UPVOTES = 50
SEED = 7


def q(id_, title, body, accepted=None, score=5, tags="<networking>"):
    row = {"Id": id_, "PostTypeId": 1, "Score": score, "Title": title, "Body": body, "Tags": tags}
    if accepted is not None:
        row["AcceptedAnswerId"] = accepted
    return row


def a(id_, parent, body, score):
    return {"Id": id_, "PostTypeId": 2, "ParentId": parent, "Score": score, "Body": body}


ROWS = [
    q(1, "DNS lookups fail on one laptop",
      "<p>Every site gives <code>DNS_PROBE_FINISHED_NXDOMAIN</code> but only on my laptop.</p>\n"
      "<p>Other devices on the same Wi-Fi are fine.</p>", accepted=2),
    a(2, 1, "<p>Your laptop has a stale static DNS server. Open the adapter settings and switch to "
            "<em>Obtain DNS server address automatically</em>.</p>", 150),
    a(3, 1, "<p>Try rebooting the router.</p>", 12),
    q(4, "Printer shows offline after Windows update",
      "<p>After the latest update my HP printer is &quot;offline&quot; &amp; nothing prints.</p>"
      "<ul><li>Cable is fine</li><li>Printer status page works</li></ul>", accepted=6),
    a(5, 4, "<p>Reinstall the driver.</p>", 3),
    a(6, 4, "<p>The update switched the port to a WSD port. Re-add the printer with a "
            "<strong>Standard TCP/IP port</strong> pointing at its IP.</p>", 100),
    q(7, "Laptop will not charge past 80%",
      "<p>Battery stops at 80&#37; every time, even overnight.</p>", accepted=8),
    a(8, 7, "<p>The vendor utility has a battery-care mode that caps charging at 80%. "
            "Turn it off in the power manager.</p>", 99),
    q(9, "How do I find which process holds a port?",
      "<p>Something is already listening on port 8080:</p>\n"
      "<pre><code>Error: listen EADDRINUSE: address already in use :::8080\n"
      "    at Server.setupListenHandle</code></pre>\n<p>How can I find it?</p>", accepted=10),
    a(10, 9, "<p>Use <code>ss</code>:</p>\n<pre><code>sudo ss -ltnp 'sport = :8080'\n</code></pre>\n"
             "<p>The last column shows the PID &amp; program.</p>", 420),
    a(11, 9, "<p>Or <code>lsof -i :8080</code>.</p>", 88),
    q(12, "Outlook keeps asking for my password",
      "<p>Outlook prompts for credentials every few minutes.<br/>I have re-entered them many times.</p>",
      accepted=13),
    a(13, 12, "<p>Clear the cached credentials in Credential Manager, then enable modern "
              "authentication for the account.</p>", 49),
    q(14, "Wi-Fi drops every hour", "<p>Connection drops roughly hourly and comes back after a minute.</p>"),
    a(15, 14, "<p>Check the DHCP lease time on the router.</p>", 230),
    q(16, "External drive not mounting on Linux",
      "<p>dmesg shows:</p><pre>sdb: sdb1\nEXT4-fs (sdb1): VFS: Can't find ext4 filesystem</pre>"
      "<p>The drive worked yesterday.</p>", accepted=17),
    a(17, 16, "<p>The partition is NTFS, not ext4. Install <code>ntfs-3g</code> and mount with "
              "<code>-t ntfs-3g</code>.</p><!-- edited for clarity -->", 310),
    q(18, "SSH connection refused",
      "<p>ssh user@host &rarr; <code>Connection refused</code>.</p>", accepted=19),
    a(19, 18, "<p>The sshd service is not running. Start it with <code>systemctl start sshd</code> and "
              "enable it at boot.</p>", 75),
    a(20, 18, "<p>Firewall?</p>", 2),
    q(21, "Excel file opens as read-only", "<p>Every workbook from the share opens read-only.</p>",
      accepted=999),
    q(22, "Zoom cannot see my webcam", "<p>Zoom lists no camera; the Camera app works.</p>", accepted=23),
    a(23, 22, "<p>Windows privacy settings block desktop apps from the camera. Allow "
              "<em>Let desktop apps access your camera</em>.</p>", 140),
    q(24, "Git push rejected",
      "<p>Push fails with:</p><pre><code>! [rejected]        main -&gt; main (fetch first)</code></pre>",
      accepted=25),
    a(25, 24, "<p>The remote has commits you do not have. Run <code>git pull --rebase</code> and push "
              "again.</p>", 512),
    q(26, "Slow boot after SSD upgrade", "<p>Boot takes 3&nbsp;minutes since cloning to an SSD.</p>",
      accepted=27),
    a(27, 26, "<p>The old HDD is still first in the boot order, so firmware waits for it to time out. "
              "Move the SSD to the top.</p>", 50),
    q(28, "VPN connects but no internet", "<p>Once the VPN is up nothing loads.</p>", accepted=29),
    a(29, 28, "<p>Full-tunnel routing sends everything through the VPN whose DNS is unreachable. "
              "Enable split tunnelling or fix the VPN DNS server.</p>", -2),
    q(30, "Cannot delete a file: in use",
      "<table><tr><th>File</th><th>Error</th></tr><tr><td>report.docx</td><td>in use</td></tr></table>",
      accepted=31),
    a(31, 30, "<p>A preview handler in Explorer holds the file. Close the preview pane or end the "
              "<code>prevhost.exe</code> process.</p>", 205),
    a(32, 30, "<p>Reboot.</p>", 1),
    q(33, "Monitor says no signal", "<blockquote>No signal detected</blockquote><p>The PC is on.</p>",
      accepted=35),
    a(34, 33, "<p>Wrong input.</p>", 4),
    a(35, 33, "<p>The cable is plugged into the motherboard output while a discrete GPU is installed. "
              "Move it to the graphics card.</p>", 180),
    q(36, "Clock drifts on domain PC", "<p>Clock is off by five minutes and Kerberos fails.</p>",
      accepted=20),
    q(37, "Keyboard types wrong symbols",
      "<p>Pressing <kbd>Shift</kbd>+<kbd>2</kbd> gives &quot; instead of @.</p>", accepted=38),
    a(38, 37, "<p>The input language is set to UK English. Switch the layout to US.</p>", 133),
    q(39, "Update fails with 0x80070002", "<p>Windows Update fails repeatedly.</p>", accepted=40),
    a(40, 39, "<p>The SoftwareDistribution cache is corrupt. Stop the update service, rename the folder, "
              "start the service.</p>", 101),
    {"Id": 41, "PostTypeId": 4, "Score": 0, "Body": "<p>Tag wiki excerpt.</p>"},
    {"Id": 42, "PostTypeId": 5, "Score": 0, "Body": "<p>Tag wiki body.</p>"},
    {"Id": 43, "Score": 3, "Body": "<p>Row without a PostTypeId.</p>"},
    q(44, "Laptop fan always loud", "<p>Fan is at full speed even when idle.</p>", score=-1),
    a(45, 44, "<p>Dust.</p>", 12),
    q(46, "Shared printer needs admin rights", "<p>Users get a UAC prompt when adding the printer.</p>",
      accepted=47),
    a(47, 46, "<p>Point-and-print restrictions were tightened. Deploy the driver through group policy "
              "so users do not need to install it.</p>", 99),
    q(48, "Empty body question", "", accepted=49),
    a(49, 48, "<p>Answer to a question with no body.</p>", 300),
    a(50, 48, "<p>Other answer.</p>", 0),
]


def write_posts(path):
    lines = ['<?xml version="1.0" encoding="utf-8"?>', "<posts>"]
    for row in ROWS:
        attrs = []
        for key, value in row.items():
            text = escape(str(value), {'"': "&quot;", "\n": "&#xA;"})
            attrs.append(f'{key}="{text}"')
        lines.append("  <row " + " ".join(attrs) + " />")
    lines.append("</posts>")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---- independent model of the pipeline ------------------------------------

BLOCK = {"p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "tr", "table",
         "blockquote", "pre"}


class Text(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.out = []
        self.pre = 0

    def _last(self):
        return self.out[-1] if self.out else ""

    def _break(self):
        if self.pre:
            return
        while self.out and self.out[-1] == " ":
            self.out.pop()
        if self.out and self.out[-1] != "\n":
            self.out.append("\n")

    def handle_starttag(self, tag, attrs):
        if tag == "pre":
            self._break()
            self.pre += 1
        elif tag in BLOCK:
            self._break()
        elif tag in ("td", "th"):
            self.handle_data(" ")

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag):
        if tag == "pre":
            if self.pre:
                self.pre -= 1
            self._break()
        elif tag in BLOCK:
            self._break()
        elif tag in ("td", "th"):
            self.handle_data(" ")

    def handle_data(self, data):
        for ch in data.replace("\xa0", " "):
            if self.pre:
                self.out.append(ch)
            elif ch in " \t\n\r\f":
                if self.out and self._last() not in (" ", "\n"):
                    self.out.append(" ")
            else:
                self.out.append(ch)

    def text(self):
        return "".join(self.out).rstrip(" \t\n\r\f")


def strip_html(html):
    p = Text()
    p.feed(html)
    p.close()
    return p.text()


def parse(path):
    posts = []
    for _, el in ElementTree.iterparse(path):
        if el.tag != "row":
            continue
        at = el.attrib
        if "Id" not in at or "PostTypeId" not in at:
            continue
        kind = int(at["PostTypeId"])
        if kind == 2 and "ParentId" not in at:
            continue
        posts.append({
            "id": int(at["Id"]),
            "type": {1: "q", 2: "a"}.get(kind, "o"),
            "parent": int(at["ParentId"]) if "ParentId" in at else None,
            "accepted": int(at["AcceptedAnswerId"]) if "AcceptedAnswerId" in at else None,
            "score": int(at.get("Score", "0")),
            "title": at.get("Title", ""),
            "body": strip_html(at.get("Body", "")),
        })
    return posts


def select(posts, threshold):
    answers = {p["id"]: p for p in posts if p["type"] == "a"}
    out = []
    for p in posts:
        if p["type"] != "q" or p["accepted"] is None:
            continue
        ans = answers.get(p["accepted"])
        if ans is None or ans["parent"] != p["id"] or ans["score"] < threshold:
            continue
        out.append({"entry_id": p["id"], "title": p["title"], "question_body": p["body"],
                    "question_summary": "", "underlying_problem": "", "accepted_answer": ans["body"],
                    "answer_upvotes": ans["score"]})
    return out


QUESTION_PROMPT = "Dumb this question down and summarize it in one or two sentence(s):"
PROBLEM_PROMPT = "Respond with only the problem: "


def mock_script(entries):
    """Replies keyed on prompt text. Entry 26's question gets only empty
    replies, so it ends up unextracted and is dropped."""
    rules = []
    for e in entries:
        if not e["question_body"]:
            continue
        q_match = QUESTION_PROMPT + e["title"]
        if e["entry_id"] == 26:
            rules.append({"match": q_match, "reply": "   ", "repeat": True})
            continue
        rules.append({"match": q_match, "reply": f"  The user asks: {e['title'].lower()}.\n"})
        rules.append({"match": PROBLEM_PROMPT + e["accepted_answer"][:40],
                      "reply": f"Problem behind entry {e['entry_id']}."})
    return rules


def extract(entries, rules):
    out = []
    for e in entries:
        if not e["question_body"] or not e["accepted_answer"]:
            continue
        q_text = e["title"] + "\n\n" + e["question_body"] if e["title"] else e["question_body"]
        q_prompt = QUESTION_PROMPT + q_text + "."
        p_prompt = ("Extract a problem statement from this post. For example, \"The computer is not plugged "
                    "in\", or \"The DNS servers are down\". " + PROBLEM_PROMPT + e["accepted_answer"] + ".")

        def reply(prompt):
            for r in rules:
                if r["match"] in prompt:
                    return r["reply"].strip()
            return ""

        summary, problem = reply(q_prompt), reply(p_prompt)
        if summary and problem:
            out.append(dict(e, question_summary=summary, underlying_problem=problem))
    return out


class MT19937_64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & 0xFFFFFFFFFFFFFFFF
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & 0xFFFFFFFFFFFFFFFF
        self.idx = 312

    def _twist(self):
        for i in range(312):
            x = (self.mt[i] & 0xFFFFFFFF80000000) | (self.mt[(i + 1) % 312] & 0x7FFFFFFF)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.idx = 0

    def __call__(self):
        if self.idx >= 312:
            self._twist()
        y = self.mt[self.idx]
        self.idx += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & 0xFFFFFFFFFFFFFFFF


def permutation(n, seed):
    rng = MT19937_64(seed)
    perm = list(range(n))

    def bounded(bound):
        reject_below = (2 ** 64 - bound) % bound
        while True:
            x = rng()
            if x >= reject_below:
                return x % bound

    for i in range(n, 1, -1):
        j = bounded(i)
        perm[i - 1], perm[j] = perm[j], perm[i - 1]
    return perm


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    posts_path = out / "Posts.xml"
    write_posts(posts_path)

    selected = select(parse(posts_path), RAG_MIN_UPVOTES)
    rules = mock_script(selected)
    (out / "extraction_mock.json").write_text(json.dumps(rules, indent=2, ensure_ascii=False) + "\n",
                                              encoding="utf-8")
    entries = extract(selected, rules)
    with open(out / "corpus.golden.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for e in entries:
            f.write(json.dumps(e, ensure_ascii=False, separators=(",", ":")) + "\n")

    perm = permutation(len(entries), SEED)
    half = len(entries) // 2
    split = {"seed": SEED, "min_upvotes": MIN_UPVOTES, "rag_min_upvotes": RAG_MIN_UPVOTES,
             "rag_pool": [entries[i]["entry_id"] for i in perm[:half]],
             "eval_pool": [entries[i]["entry_id"] for i in perm[half:]]}
    (out / "split.golden.json").write_text(json.dumps(split, indent=2) + "\n", encoding="utf-8")
    print(f"{len(ROWS)} rows, {len(selected)} selected, {len(entries)} extracted")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "ingest")
