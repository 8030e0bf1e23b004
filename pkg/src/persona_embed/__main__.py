import sys

from persona_embed.cli import main

sys.exit(main())
