from periodica.cli import main

raise SystemExit(main())
