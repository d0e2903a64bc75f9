import os
import sys
from types import SimpleNamespace

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pdfgen import PaperLayout, acl_style_reference, render_paper  # noqa: E402

from citecheck import bibdb  # noqa: E402


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A 60-title database plus one clean and one tainted fixture paper.

    The tainted paper contains one fabricated reference (nowhere near any
    database title) and one unparseable reference (no recognizable title).
    """
    root = tmp_path_factory.mktemp("corpus")
    titles = [
        f"Known Reference Title Number {i} About Synthetic Things"
        for i in range(60)
    ]
    source = root / "source.tsv"
    source.write_text(
        "id\ttitle\n"
        + "".join(f"k{i:03d}\t{t}\n" for i, t in enumerate(titles)),
        encoding="utf-8",
    )
    ingest_result = bibdb.ingest(source, "fixture", root / "db")
    lockfile = root / "pins.lock"
    bibdb.write_lockfile([ingest_result.manifest], lockfile)

    def ref(i):
        return acl_style_reference(
            f"Author {chr(65 + i % 26)} Person",
            2010 + i % 15,
            titles[i],
            "Proceedings of the Conference on Examples",
            f"{i + 1}-{i + 10}",
        )

    clean_refs = [ref(i) for i in range(8)]
    clean = render_paper(clean_refs, PaperLayout(columns=1, body_lines=8))
    clean_path = root / "ok.pdf"
    clean_path.write_bytes(clean.pdf_bytes)

    fabricated_title = "Entirely Fabricated Nonexistent Study Of Moon Cheese"
    tainted_refs = [ref(i) for i in range(6)] + [
        acl_style_reference("Fake Author", 2022, fabricated_title,
                            "Proceedings of Nowhere", "3-14"),
        "An entry so mangled that no field structure survives at all",
    ]
    tainted = render_paper(tainted_refs, PaperLayout(columns=1, body_lines=8))
    tainted_path = root / "tainted.pdf"
    tainted_path.write_bytes(tainted.pdf_bytes)

    return SimpleNamespace(
        root=root,
        db_dir=root / "db",
        manifest=ingest_result.manifest,
        lockfile=lockfile,
        titles=titles,
        clean_pdf=clean_path,
        tainted_pdf=tainted_path,
        fabricated_title=fabricated_title,
        clean_ref_count=len(clean_refs),
        tainted_ref_count=len(tainted_refs),
    )
