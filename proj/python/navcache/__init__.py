# Copyright (C) 2026 navcache authors
# SPDX-License-Identifier: Apache-2.0
"""View-aligned dual-gated KV token caching on synthetic navigation episodes.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from navcache._core import *  # noqa: F401,F403
from navcache._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
