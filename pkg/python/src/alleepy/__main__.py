# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import sys

from ._cli import main

sys.exit(main())
