"""
Shared `main()` plumbing for the scripts/test_*.py files.

Each test module can run standalone (python scripts/test_x.py) or under
pytest; standalone runs print a banner per test and a summary block.
"""

import traceback
from typing import Callable, Sequence


def banner(title: str) -> None:
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def run_all(title: str, tests: Sequence[Callable[[], None]]) -> int:
    print("\n" + "#" * 60)
    print(f"# {title}")
    print("#" * 60)

    results = []
    for test in tests:
        banner(test.__name__)
        try:
            test()
            results.append((test.__name__, True))
        except Exception:
            traceback.print_exc()
            results.append((test.__name__, False))

    print("\n" + "#" * 60)
    print("# SUMMARY")
    print("#" * 60)
    for name, passed in results:
        print(f"  {'[PASS]' if passed else '[FAIL]'}: {name}")

    all_passed = all(passed for _, passed in results)
    print("\n" + "#" * 60)
    print("# ALL TESTS PASSED!" if all_passed else "# SOME TESTS FAILED!")
    print("#" * 60 + "\n")
    return 0 if all_passed else 1
