from weakrel.cli import main

raise SystemExit(main())
